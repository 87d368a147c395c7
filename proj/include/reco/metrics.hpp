#ifndef RECO_METRICS_HPP
#define RECO_METRICS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reco/dataset.hpp"

namespace reco {

// Items in descending predicted-score order, ties broken by ascending item id.
struct RankedList {
    int user_id = 0;
    std::vector<int> items;
    std::vector<double> scores;
};

struct RelevanceSet {
    int user_id = 0;
    std::set<int> relevant_items;
    std::map<int, double> graded_relevance;
};

struct MetricReport {
    double map = 0.0;
    double map_at_k = 0.0;
    double ndcg = 0.0;
    double precision_at_k = 0.0;
    double recall_at_k = 0.0;
    double explained_variance = 0.0;
    double mae = 0.0;
    int k = 10;
};

// Anything trainable that scores (user, item) pairs.
class RecommenderModel {
public:
    virtual ~RecommenderModel() = default;
    virtual double score(int user_id, int item_id) const = 0;
    virtual bool trained() const = 0;
};

// nullopt = skip-user sentinel (empty relevance set); never divides by zero.
std::optional<double> average_precision(const RankedList& ranked, const RelevanceSet& truth,
                                        std::optional<int> cutoff = std::nullopt);

double mean_average_precision(const std::vector<RankedList>& all_ranked,
                              const std::vector<RelevanceSet>& all_truth,
                              std::optional<int> cutoff = std::nullopt);

std::optional<double> ndcg(const RankedList& ranked, const RelevanceSet& truth, int cutoff);

double precision_at_k(const RankedList& ranked, const RelevanceSet& truth, int k);
std::optional<double> recall_at_k(const RankedList& ranked, const RelevanceSet& truth, int k);

// Population (1/N) variance flavor.
double explained_variance(const std::vector<double>& predicted,
                          const std::vector<double>& actual);

double mae(const std::vector<double>& predicted, const std::vector<double>& actual);

// Candidates sorted by model score descending, ties by ascending item id.
RankedList rank_items(const RecommenderModel& model, int user_id,
                      const std::vector<int>& candidates);

struct EvaluateOptions {
    int k = 10;
    // Explicit data: restrict relevance to ratings >= threshold when set.
    std::optional<double> relevance_threshold;
};

// Full-ranking protocol: each test user's candidates are all items minus the
// user's train items; relevance comes from that user's test interactions.
// MAE / explained variance run over every test row with raw ratings.
MetricReport evaluate(const RecommenderModel& model, const SplitDataset& data,
                      const EvaluateOptions& opts = {});

double metric_value(const MetricReport& report, std::string_view name);
std::vector<std::string> metric_names();

}  // namespace reco

#endif  // RECO_METRICS_HPP
