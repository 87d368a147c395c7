#include "reco/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "reco/rng.hpp"

namespace reco {

namespace {

std::uint64_t pair_key(int user, int item) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(user)) << 32) |
           static_cast<std::uint32_t>(item);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    return out;
}

}  // namespace

Dataset::Dataset(std::vector<Interaction> interactions, DatasetKind kind, RatingScale scale)
    : interactions_(std::move(interactions)), kind_(kind), scale_(scale) {
    std::unordered_set<std::uint64_t> seen_positive;
    for (std::size_t pos = 0; pos < interactions_.size(); ++pos) {
        const Interaction& it = interactions_[pos];
        if (it.user_id < 0 || it.item_id < 0)
            throw ValidationError("negative user or item id");
        if (!std::isfinite(it.rating))
            throw ValidationError("non-finite rating");
        if (kind_ == DatasetKind::explicit_ratings) {
            if (it.rating < scale_.min || it.rating > scale_.max)
                throw ValidationError("rating outside scale");
        } else {
            if (it.rating != 0.0 && it.rating != 1.0)
                throw ValidationError("implicit rating must be 0 or 1");
        }
        if (it.rating > 0.0) {
            if (!seen_positive.insert(pair_key(it.user_id, it.item_id)).second)
                throw ValidationError("duplicate (user, item) pair");
        }
        user_index_[it.user_id].push_back(pos);
        item_index_[it.item_id].push_back(pos);
    }
}

Dataset load_movielens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    std::vector<Interaction> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_fields(line, '\t');
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
        try {
            Interaction it;
            it.user_id = std::stoi(fields[0]);
            it.item_id = std::stoi(fields[1]);
            it.rating = std::stod(fields[2]);
            it.timestamp = std::stoll(fields[3]);
            rows.push_back(it);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(lineno) + ": malformed integer field");
        }
    }
    if (rows.empty()) throw ParseError("no interactions in " + path);
    return Dataset(std::move(rows), DatasetKind::explicit_ratings, {1.0, 5.0});
}

Dataset load_amazon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    std::vector<Interaction> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        char sep = line.find(',') != std::string::npos ? ',' : '\t';
        auto fields = split_fields(line, sep);
        if (fields.size() < 2)
            throw ParseError("line " + std::to_string(lineno) + ": expected at least (user, item)");
        try {
            Interaction it;
            it.user_id = std::stoi(fields[0]);
            it.item_id = std::stoi(fields[1]);
            it.rating = 1.0;
            if (fields.size() >= 4) it.timestamp = std::stoll(fields[3]);
            rows.push_back(it);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(lineno) + ": malformed field");
        }
    }
    if (rows.empty()) throw ParseError("no interactions in " + path);
    return Dataset(std::move(rows), DatasetKind::implicit_feedback, {0.0, 1.0});
}

Dataset negative_sample(const Dataset& data, int ratio, std::uint64_t seed) {
    if (data.kind() != DatasetKind::implicit_feedback)
        throw ValidationError("negative sampling requires an implicit dataset");
    if (ratio <= 0) throw ValidationError("ratio must be positive");

    std::vector<int> all_items;
    all_items.reserve(data.item_index().size());
    for (const auto& [item, _] : data.item_index()) all_items.push_back(item);

    std::unordered_set<std::uint64_t> observed;
    for (const Interaction& it : data.interactions())
        observed.insert(pair_key(it.user_id, it.item_id));

    std::vector<Interaction> out = data.interactions();
    // Sorted user order + per-user derived seed keeps output reproducible.
    for (const auto& [user, positions] : data.user_index()) {
        std::size_t n_pos = 0;
        for (std::size_t p : positions)
            if (data.interactions()[p].rating > 0.0) ++n_pos;

        std::vector<int> pool;
        pool.reserve(all_items.size());
        for (int item : all_items)
            if (!observed.count(pair_key(user, item))) pool.push_back(item);

        std::size_t want = std::min(pool.size(),
                                    static_cast<std::size_t>(ratio) * n_pos);
        auto rng = make_rng(derive_seed(seed, user));
        // Partial Fisher-Yates: first `want` entries are a uniform sample.
        for (std::size_t i = 0; i < want; ++i) {
            std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
            std::swap(pool[i], pool[dist(rng)]);
            out.push_back(Interaction{user, pool[i], 0.0, std::nullopt});
        }
    }
    return Dataset(std::move(out), DatasetKind::implicit_feedback, data.rating_scale());
}

SplitDataset split(const Dataset& data, double train_fraction, std::uint64_t seed,
                   bool per_user_stratified) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ValidationError("train_fraction must be in (0, 1)");
    if (data.size() < 2)
        throw ValidationError("need at least 2 interactions to split");

    std::vector<std::size_t> train_pos, test_pos;
    if (per_user_stratified) {
        for (const auto& [user, positions] : data.user_index()) {
            std::vector<std::size_t> perm = positions;
            auto rng = make_rng(derive_seed(seed, user));
            std::shuffle(perm.begin(), perm.end(), rng);
            std::size_t n_train = static_cast<std::size_t>(
                std::llround(train_fraction * static_cast<double>(perm.size())));
            for (std::size_t i = 0; i < perm.size(); ++i)
                (i < n_train ? train_pos : test_pos).push_back(perm[i]);
        }
    } else {
        std::vector<std::size_t> perm(data.size());
        std::iota(perm.begin(), perm.end(), 0);
        auto rng = make_rng(seed);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(data.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, data.size() - 1);
        train_pos.assign(perm.begin(), perm.begin() + n_train);
        test_pos.assign(perm.begin() + n_train, perm.end());
    }
    std::sort(train_pos.begin(), train_pos.end());
    std::sort(test_pos.begin(), test_pos.end());

    std::vector<Interaction> train_rows, test_rows;
    train_rows.reserve(train_pos.size());
    test_rows.reserve(test_pos.size());
    for (std::size_t p : train_pos) train_rows.push_back(data.interactions()[p]);
    for (std::size_t p : test_pos) test_rows.push_back(data.interactions()[p]);

    SplitDataset out;
    out.train = Dataset(std::move(train_rows), data.kind(), data.rating_scale());
    out.test = Dataset(std::move(test_rows), data.kind(), data.rating_scale());
    out.split_seed = seed;
    out.train_fraction = train_fraction;
    return out;
}

namespace {

Dataset delete_matching(const Dataset& data, int id, bool by_user) {
    std::vector<Interaction> kept;
    kept.reserve(data.size());
    for (const Interaction& it : data.interactions()) {
        int key = by_user ? it.user_id : it.item_id;
        if (key != id) kept.push_back(it);
    }
    return Dataset(std::move(kept), data.kind(), data.rating_scale());
}

}  // namespace

Dataset delete_user(const Dataset& data, int user_id) {
    if (!data.has_user(user_id))
        throw NotFoundError("user " + std::to_string(user_id) + " not in dataset");
    return delete_matching(data, user_id, true);
}

Dataset delete_item(const Dataset& data, int item_id) {
    if (!data.has_item(item_id))
        throw NotFoundError("item " + std::to_string(item_id) + " not in dataset");
    return delete_matching(data, item_id, false);
}

DatasetStats stats(const Dataset& data) {
    if (data.empty()) throw ValidationError("stats of empty dataset");

    DatasetStats s;
    s.n_ratings = data.size();
    s.n_users = data.n_users();
    s.n_items = data.n_items();
    s.density = static_cast<double>(s.n_ratings) /
                (static_cast<double>(s.n_users) * static_cast<double>(s.n_items));
    s.avg_ratings_per_user = static_cast<double>(s.n_ratings) / static_cast<double>(s.n_users);
    s.avg_ratings_per_item = static_cast<double>(s.n_ratings) / static_cast<double>(s.n_items);

    s.min_ratings_per_user = std::numeric_limits<std::size_t>::max();
    s.min_ratings_per_item = std::numeric_limits<std::size_t>::max();
    for (const auto& [_, positions] : data.user_index()) {
        s.min_ratings_per_user = std::min(s.min_ratings_per_user, positions.size());
        s.max_ratings_per_user = std::max(s.max_ratings_per_user, positions.size());
    }
    for (const auto& [_, positions] : data.item_index()) {
        s.min_ratings_per_item = std::min(s.min_ratings_per_item, positions.size());
        s.max_ratings_per_item = std::max(s.max_ratings_per_item, positions.size());
    }

    if (data.kind() == DatasetKind::explicit_ratings) {
        double sum = 0.0;
        for (const Interaction& it : data.interactions()) sum += it.rating;
        s.avg_rating = sum / static_cast<double>(s.n_ratings);
    }
    return s;
}

}  // namespace reco
