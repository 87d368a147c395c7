#include "reco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reco {

std::optional<double> average_precision(const RankedList& ranked, const RelevanceSet& truth,
                                        std::optional<int> cutoff) {
    if (ranked.items.empty()) throw ValidationError("empty ranked list");
    if (truth.relevant_items.empty()) return std::nullopt;

    std::size_t limit = ranked.items.size();
    if (cutoff) limit = std::min(limit, static_cast<std::size_t>(*cutoff));

    double hits = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < limit; ++i) {
        if (truth.relevant_items.count(ranked.items[i])) {
            hits += 1.0;
            sum += hits / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(truth.relevant_items.size());
}

double mean_average_precision(const std::vector<RankedList>& all_ranked,
                              const std::vector<RelevanceSet>& all_truth,
                              std::optional<int> cutoff) {
    if (all_ranked.size() != all_truth.size())
        throw ValidationError("ranked/truth lists misaligned");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < all_ranked.size(); ++i) {
        if (auto ap = average_precision(all_ranked[i], all_truth[i], cutoff)) {
            sum += *ap;
            ++n;
        }
    }
    if (n == 0) throw ValidationError("no evaluable users");
    return sum / static_cast<double>(n);
}

std::optional<double> ndcg(const RankedList& ranked, const RelevanceSet& truth, int cutoff) {
    if (cutoff < 1) throw ValidationError("cutoff must be >= 1");
    if (truth.relevant_items.empty()) return std::nullopt;

    std::size_t limit = std::min(ranked.items.size(), static_cast<std::size_t>(cutoff));
    double dcg = 0.0;
    for (std::size_t i = 0; i < limit; ++i) {
        auto it = truth.graded_relevance.find(ranked.items[i]);
        if (it != truth.graded_relevance.end())
            dcg += it->second / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<double> grades;
    grades.reserve(truth.graded_relevance.size());
    for (const auto& [_, g] : truth.graded_relevance) grades.push_back(g);
    std::sort(grades.begin(), grades.end(), std::greater<>());
    std::size_t ideal_limit = std::min(grades.size(), static_cast<std::size_t>(cutoff));
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal_limit; ++i)
        idcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);

    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double precision_at_k(const RankedList& ranked, const RelevanceSet& truth, int k) {
    if (k < 1) throw ValidationError("k must be >= 1");
    std::size_t limit = std::min(ranked.items.size(), static_cast<std::size_t>(k));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < limit; ++i)
        if (truth.relevant_items.count(ranked.items[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

std::optional<double> recall_at_k(const RankedList& ranked, const RelevanceSet& truth, int k) {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (truth.relevant_items.empty()) return std::nullopt;
    std::size_t limit = std::min(ranked.items.size(), static_cast<std::size_t>(k));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < limit; ++i)
        if (truth.relevant_items.count(ranked.items[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.relevant_items.size());
}

namespace {

double population_variance(const std::vector<double>& xs) {
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size());
}

}  // namespace

double explained_variance(const std::vector<double>& predicted,
                          const std::vector<double>& actual) {
    if (predicted.size() != actual.size()) throw ValidationError("length mismatch");
    if (actual.size() < 2) throw ValidationError("need at least 2 samples");
    double var_actual = population_variance(actual);
    if (var_actual == 0.0) throw ValidationError("zero target variance");
    std::vector<double> residual(actual.size());
    for (std::size_t i = 0; i < actual.size(); ++i)
        residual[i] = actual[i] - predicted[i];
    return 1.0 - population_variance(residual) / var_actual;
}

double mae(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size()) throw ValidationError("length mismatch");
    if (predicted.empty()) throw ValidationError("empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        acc += std::abs(predicted[i] - actual[i]);
    return acc / static_cast<double>(predicted.size());
}

RankedList rank_items(const RecommenderModel& model, int user_id,
                      const std::vector<int>& candidates) {
    if (!model.trained()) throw ValidationError("model not trained");
    if (candidates.empty()) throw ValidationError("empty candidate set");

    std::vector<std::pair<double, int>> scored;
    scored.reserve(candidates.size());
    for (int item : candidates)
        scored.emplace_back(model.score(user_id, item), item);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    RankedList out;
    out.user_id = user_id;
    out.items.reserve(scored.size());
    out.scores.reserve(scored.size());
    for (const auto& [s, item] : scored) {
        out.items.push_back(item);
        out.scores.push_back(s);
    }
    return out;
}

MetricReport evaluate(const RecommenderModel& model, const SplitDataset& data,
                      const EvaluateOptions& opts) {
    if (!model.trained()) throw ValidationError("model not trained");

    // Item universe: everything the split has seen.
    std::set<int> universe;
    for (const auto& [item, _] : data.train.item_index()) universe.insert(item);
    for (const auto& [item, _] : data.test.item_index()) universe.insert(item);

    std::vector<RankedList> ranked_lists;
    std::vector<RelevanceSet> truths;
    std::vector<double> predicted, actual;

    for (const auto& [user, positions] : data.test.user_index()) {
        RelevanceSet truth;
        truth.user_id = user;
        for (std::size_t p : positions) {
            const Interaction& it = data.test.interactions()[p];
            predicted.push_back(model.score(user, it.item_id));
            actual.push_back(it.rating);
            if (it.rating <= 0.0) continue;  // sampled negatives are never relevant
            if (opts.relevance_threshold && it.rating < *opts.relevance_threshold) continue;
            truth.relevant_items.insert(it.item_id);
            truth.graded_relevance[it.item_id] = it.rating;
        }
        if (truth.relevant_items.empty()) continue;

        std::set<int> train_items;
        auto train_user = data.train.user_index().find(user);
        if (train_user != data.train.user_index().end())
            for (std::size_t p : train_user->second)
                train_items.insert(data.train.interactions()[p].item_id);

        std::vector<int> candidates;
        candidates.reserve(universe.size());
        for (int item : universe)
            if (!train_items.count(item)) candidates.push_back(item);
        if (candidates.empty()) continue;

        ranked_lists.push_back(rank_items(model, user, candidates));
        truths.push_back(std::move(truth));
    }

    MetricReport report;
    report.k = opts.k;
    if (!ranked_lists.empty()) {
        double ndcg_sum = 0.0, prec_sum = 0.0, rec_sum = 0.0;
        for (std::size_t i = 0; i < ranked_lists.size(); ++i) {
            ndcg_sum += ndcg(ranked_lists[i], truths[i], opts.k).value();
            prec_sum += precision_at_k(ranked_lists[i], truths[i], opts.k);
            rec_sum += recall_at_k(ranked_lists[i], truths[i], opts.k).value();
        }
        double n = static_cast<double>(ranked_lists.size());
        report.map = mean_average_precision(ranked_lists, truths);
        report.map_at_k = mean_average_precision(ranked_lists, truths, opts.k);
        report.ndcg = ndcg_sum / n;
        report.precision_at_k = prec_sum / n;
        report.recall_at_k = rec_sum / n;
    }
    if (predicted.size() >= 1) report.mae = mae(predicted, actual);
    if (predicted.size() >= 2 && population_variance(actual) > 0.0)
        report.explained_variance = explained_variance(predicted, actual);
    return report;
}

double metric_value(const MetricReport& report, std::string_view name) {
    if (name == "map") return report.map;
    if (name == "map_at_k") return report.map_at_k;
    if (name == "ndcg") return report.ndcg;
    if (name == "precision_at_k") return report.precision_at_k;
    if (name == "recall_at_k") return report.recall_at_k;
    if (name == "explained_variance") return report.explained_variance;
    if (name == "mae") return report.mae;
    throw ValidationError("unknown metric: " + std::string(name));
}

std::vector<std::string> metric_names() {
    return {"map", "map_at_k", "ndcg", "precision_at_k",
            "recall_at_k", "explained_variance", "mae"};
}

}  // namespace reco
