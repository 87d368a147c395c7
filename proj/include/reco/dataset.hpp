#ifndef RECO_DATASET_HPP
#define RECO_DATASET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reco {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One (user, item, rating, timestamp) event.
struct Interaction {
    int user_id = 0;
    int item_id = 0;
    double rating = 0.0;
    std::optional<std::int64_t> timestamp;
};

enum class DatasetKind { explicit_ratings, implicit_feedback };

struct RatingScale {
    double min = 1.0;
    double max = 5.0;
};

// Immutable interaction collection with per-user and per-item position
// indices. Deletion views build new datasets; nothing mutates in place.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<Interaction> interactions, DatasetKind kind,
            RatingScale scale = {1.0, 5.0});

    const std::vector<Interaction>& interactions() const { return interactions_; }
    DatasetKind kind() const { return kind_; }
    RatingScale rating_scale() const { return scale_; }
    std::size_t size() const { return interactions_.size(); }
    bool empty() const { return interactions_.empty(); }

    // Sorted maps so iteration order is deterministic everywhere.
    const std::map<int, std::vector<std::size_t>>& user_index() const { return user_index_; }
    const std::map<int, std::vector<std::size_t>>& item_index() const { return item_index_; }

    bool has_user(int user_id) const { return user_index_.count(user_id) > 0; }
    bool has_item(int item_id) const { return item_index_.count(item_id) > 0; }

    std::size_t n_users() const { return user_index_.size(); }
    std::size_t n_items() const { return item_index_.size(); }

private:
    std::vector<Interaction> interactions_;
    std::map<int, std::vector<std::size_t>> user_index_;
    std::map<int, std::vector<std::size_t>> item_index_;
    DatasetKind kind_ = DatasetKind::explicit_ratings;
    RatingScale scale_;
};

struct SplitDataset {
    Dataset train;
    Dataset test;
    std::uint64_t split_seed = 0;
    double train_fraction = 0.75;
};

struct DatasetStats {
    std::size_t n_ratings = 0;
    std::size_t n_items = 0;
    std::size_t n_users = 0;
    double density = 0.0;
    double avg_ratings_per_item = 0.0;
    double avg_ratings_per_user = 0.0;
    std::size_t min_ratings_per_item = 0;
    std::size_t min_ratings_per_user = 0;
    std::size_t max_ratings_per_item = 0;
    std::size_t max_ratings_per_user = 0;
    std::optional<double> avg_rating;  // explicit datasets only
};

// Tab-separated (user, item, rating, timestamp) integer records, one per line.
Dataset load_movielens(const std::string& path);

// Comma- or tab-separated (user, item[, rating[, timestamp]]) records.
// Every loaded interaction gets rating 1.0 (implicit positives).
Dataset load_amazon(const std::string& path);

// All positives plus ratio x |positives| unobserved (user, item) pairs with
// rating 0.0, sampled uniformly without replacement per user. A user whose
// unobserved pool is too small gets the whole pool.
Dataset negative_sample(const Dataset& data, int ratio, std::uint64_t seed);

SplitDataset split(const Dataset& data, double train_fraction, std::uint64_t seed,
                   bool per_user_stratified = false);

Dataset delete_user(const Dataset& data, int user_id);
Dataset delete_item(const Dataset& data, int item_id);

DatasetStats stats(const Dataset& data);

}  // namespace reco

#endif  // RECO_DATASET_HPP
