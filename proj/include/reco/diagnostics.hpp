#ifndef RECO_DIAGNOSTICS_HPP
#define RECO_DIAGNOSTICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reco/dataset.hpp"
#include "reco/metrics.hpp"
#include "reco/ncf.hpp"
#include "reco/svd.hpp"

namespace reco {

enum class EntityKind { user, item };
enum class ModelKind { ncf, svd };
enum class Direction { most_influential, least_influential };
enum class RecordStatus { ok, skipped, failed };

// Everything a single delete -> split -> train -> evaluate pass needs.
struct RunConfig {
    ModelKind model_kind = ModelKind::ncf;
    NcfConfig ncf;
    int svd_rank = 10;
    FillPolicy svd_fill = FillPolicy::user_mean;
    double train_fraction = 0.75;
    std::uint64_t split_seed = 42;
    int metric_k = 10;
    std::string metric_name = "map";
    int negative_ratio = 4;  // implicit pipeline only; NCF handles explicit negatives
    bool per_user_stratified = false;
    std::optional<double> relevance_threshold;
};

struct InfluenceRecord {
    int entity_id = 0;
    EntityKind entity_kind = EntityKind::user;
    double baseline_eval = 0.0;
    double deleted_eval = 0.0;
    double influence = 0.0;  // baseline_eval - deleted_eval, exactly
    std::string metric_name;
    std::uint64_t retrain_seed = 0;
    RecordStatus status = RecordStatus::ok;
    double wall_time_ms = 0.0;  // timing only; excluded from canonical output
};

struct SweepPlan {
    EntityKind entity_kind = EntityKind::user;
    std::vector<int> entities;              // empty = sweep everything
    std::optional<std::size_t> sample_size; // uniform random subset
    int workers = 1;
    std::uint64_t master_seed = 0;
    bool shared_seed = false;  // all retrains reuse the master seed
};

struct InfluenceReport {
    std::vector<InfluenceRecord> records;
    MetricReport baseline_report;
    ModelKind model_kind = ModelKind::ncf;
    EntityKind entity_kind = EntityKind::user;
    RunConfig config;
    std::uint64_t dataset_fingerprint = 0;
};

struct AblationReport {
    std::vector<int> removed_entities;
    EntityKind entity_kind = EntityKind::user;
    Direction direction = Direction::most_influential;
    MetricReport before;
    MetricReport after;
    // (after - before) / before * 100, only for metrics with before != 0.
    std::map<std::string, double> percent_delta;
};

// The shared pipeline: negative-sample (implicit), split with the configured
// seed, train with train_seed, evaluate all seven metrics.
MetricReport train_and_evaluate(const Dataset& data, const RunConfig& cfg,
                                std::uint64_t train_seed);

InfluenceReport influence_sweep_users(const Dataset& data, const RunConfig& cfg,
                                      const SweepPlan& plan);
InfluenceReport influence_sweep_items(const Dataset& data, const RunConfig& cfg,
                                      const SweepPlan& plan);

std::vector<int> top_influencers(const InfluenceReport& report, int n, Direction direction);

AblationReport ablate(const Dataset& data, const RunConfig& cfg, EntityKind kind,
                      const std::vector<int>& entities, std::uint64_t master_seed,
                      Direction direction = Direction::most_influential);

// O(n x T_train) projection, divided by the worker count.
double estimate_cost_seconds(std::size_t n_entities, int workers, double t_train_seconds);

std::uint64_t dataset_fingerprint(const Dataset& data);

}  // namespace reco

#endif  // RECO_DIAGNOSTICS_HPP
