#include "reco/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <thread>

#include "reco/rng.hpp"

namespace reco {

MetricReport train_and_evaluate(const Dataset& data, const RunConfig& cfg,
                                std::uint64_t train_seed) {
    Dataset working = data;
    if (data.kind() == DatasetKind::implicit_feedback && cfg.negative_ratio > 0)
        working = negative_sample(data, cfg.negative_ratio, train_seed);

    SplitDataset sp = split(working, cfg.train_fraction, cfg.split_seed,
                            cfg.per_user_stratified);

    EvaluateOptions opts;
    opts.k = cfg.metric_k;
    opts.relevance_threshold = cfg.relevance_threshold;

    if (cfg.model_kind == ModelKind::svd) {
        SvdRecommender model = SvdRecommender::fit(sp.train, cfg.svd_rank, cfg.svd_fill);
        return evaluate(model, sp, opts);
    }
    NcfConfig ncf_cfg = cfg.ncf;
    ncf_cfg.seed = train_seed;
    NcfModel model = NcfModel::train(sp.train, ncf_cfg);
    return evaluate(model, sp, opts);
}

namespace {

std::vector<int> plan_entities(const Dataset& data, const SweepPlan& plan) {
    std::vector<int> entities;
    if (!plan.entities.empty()) {
        entities = plan.entities;
        std::sort(entities.begin(), entities.end());
    } else {
        if (plan.entity_kind == EntityKind::user)
            for (const auto& [id, _] : data.user_index()) entities.push_back(id);
        else
            for (const auto& [id, _] : data.item_index()) entities.push_back(id);
    }
    if (plan.sample_size && *plan.sample_size < entities.size()) {
        auto rng = make_rng(plan.master_seed);
        for (std::size_t i = 0; i < *plan.sample_size; ++i) {
            std::uniform_int_distribution<std::size_t> dist(i, entities.size() - 1);
            std::swap(entities[i], entities[dist(rng)]);
        }
        entities.resize(*plan.sample_size);
        std::sort(entities.begin(), entities.end());
    }
    return entities;
}

InfluenceReport run_sweep(const Dataset& data, const RunConfig& cfg,
                          const SweepPlan& plan, EntityKind kind) {
    MetricReport baseline = train_and_evaluate(data, cfg, plan.master_seed);
    double baseline_eval = metric_value(baseline, cfg.metric_name);

    // An entity whose interactions all land in the baseline test partition
    // never touches training; retraining without it is meaningless.
    Dataset baseline_working = data;
    if (data.kind() == DatasetKind::implicit_feedback && cfg.negative_ratio > 0)
        baseline_working = negative_sample(data, cfg.negative_ratio, plan.master_seed);
    SplitDataset baseline_split = split(baseline_working, cfg.train_fraction,
                                        cfg.split_seed, cfg.per_user_stratified);
    std::set<int> in_train;
    if (kind == EntityKind::user)
        for (const auto& [id, _] : baseline_split.train.user_index()) in_train.insert(id);
    else
        for (const auto& [id, _] : baseline_split.train.item_index()) in_train.insert(id);

    std::vector<int> entities = plan_entities(data, plan);

    InfluenceReport report;
    report.baseline_report = baseline;
    report.model_kind = cfg.model_kind;
    report.entity_kind = kind;
    report.config = cfg;
    report.dataset_fingerprint = dataset_fingerprint(data);
    report.records.resize(entities.size());

    auto run_one = [&](std::size_t idx) {
        int entity = entities[idx];
        InfluenceRecord rec;
        rec.entity_id = entity;
        rec.entity_kind = kind;
        rec.baseline_eval = baseline_eval;
        rec.metric_name = cfg.metric_name;
        rec.retrain_seed = plan.shared_seed ? plan.master_seed
                                            : derive_seed(plan.master_seed, entity);

        auto t0 = std::chrono::steady_clock::now();
        if (!in_train.count(entity)) {
            rec.status = RecordStatus::skipped;
            rec.deleted_eval = std::numeric_limits<double>::quiet_NaN();
            rec.influence = std::numeric_limits<double>::quiet_NaN();
        } else {
            try {
                Dataset deleted = kind == EntityKind::user ? delete_user(data, entity)
                                                           : delete_item(data, entity);
                MetricReport ev = train_and_evaluate(deleted, cfg, rec.retrain_seed);
                rec.deleted_eval = metric_value(ev, cfg.metric_name);
                rec.influence = rec.baseline_eval - rec.deleted_eval;
            } catch (const std::exception&) {
                rec.status = RecordStatus::failed;
                rec.deleted_eval = std::numeric_limits<double>::quiet_NaN();
                rec.influence = std::numeric_limits<double>::quiet_NaN();
            }
        }
        rec.wall_time_ms = std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0).count();
        report.records[idx] = std::move(rec);
    };

    int workers = std::max(plan.workers, 1);
    if (workers == 1 || entities.size() <= 1) {
        for (std::size_t i = 0; i < entities.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= entities.size()) return;
                    run_one(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return report;
}

}  // namespace

InfluenceReport influence_sweep_users(const Dataset& data, const RunConfig& cfg,
                                      const SweepPlan& plan) {
    SweepPlan p = plan;
    p.entity_kind = EntityKind::user;
    return run_sweep(data, cfg, p, EntityKind::user);
}

InfluenceReport influence_sweep_items(const Dataset& data, const RunConfig& cfg,
                                      const SweepPlan& plan) {
    SweepPlan p = plan;
    p.entity_kind = EntityKind::item;
    return run_sweep(data, cfg, p, EntityKind::item);
}

std::vector<int> top_influencers(const InfluenceReport& report, int n, Direction direction) {
    if (n <= 0) throw ValidationError("n must be positive");
    std::vector<const InfluenceRecord*> ok;
    for (const InfluenceRecord& rec : report.records)
        if (rec.status == RecordStatus::ok) ok.push_back(&rec);
    if (static_cast<std::size_t>(n) > ok.size())
        throw ValidationError("n exceeds usable record count");

    std::sort(ok.begin(), ok.end(), [&](const InfluenceRecord* a, const InfluenceRecord* b) {
        if (a->influence != b->influence)
            return direction == Direction::most_influential ? a->influence > b->influence
                                                            : a->influence < b->influence;
        return a->entity_id < b->entity_id;
    });

    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(ok[static_cast<std::size_t>(i)]->entity_id);
    return out;
}

AblationReport ablate(const Dataset& data, const RunConfig& cfg, EntityKind kind,
                      const std::vector<int>& entities, std::uint64_t master_seed,
                      Direction direction) {
    Dataset reduced = data;
    for (int entity : entities)
        reduced = kind == EntityKind::user ? delete_user(reduced, entity)
                                           : delete_item(reduced, entity);
    if (reduced.empty()) throw ValidationError("removal empties dataset");

    AblationReport report;
    report.removed_entities = entities;
    report.entity_kind = kind;
    report.direction = direction;
    report.before = train_and_evaluate(data, cfg, master_seed);
    report.after = train_and_evaluate(reduced, cfg, master_seed);
    for (const std::string& name : metric_names()) {
        double before = metric_value(report.before, name);
        if (before != 0.0)
            report.percent_delta[name] =
                (metric_value(report.after, name) - before) / before * 100.0;
    }
    return report;
}

double estimate_cost_seconds(std::size_t n_entities, int workers, double t_train_seconds) {
    if (workers < 1) throw ValidationError("workers must be >= 1");
    return static_cast<double>(n_entities) * t_train_seconds / static_cast<double>(workers);
}

std::uint64_t dataset_fingerprint(const Dataset& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<std::uint64_t>(data.kind()));
    for (const Interaction& it : data.interactions()) {
        mix(static_cast<std::uint64_t>(it.user_id));
        mix(static_cast<std::uint64_t>(it.item_id));
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(it.rating));
        std::memcpy(&bits, &it.rating, sizeof(bits));
        mix(bits);
    }
    return h;
}

}  // namespace reco
