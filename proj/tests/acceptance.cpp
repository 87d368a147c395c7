// Acceptance gate. Each criterion prints exactly one PASS/FAIL/SKIP line;
// the process exits nonzero if any criterion fails. Criteria that need the
// MovieLens or Amazon files report SKIP when the files are not present
// (point RECO_ML100K at u.data and RECO_AMAZON at the ratings file).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reco/dataset.hpp"
#include "reco/diagnostics.hpp"
#include "reco/metrics.hpp"
#include "reco/ncf.hpp"
#include "reco/report_io.hpp"
#include "reco/rng.hpp"
#include "reco/svd.hpp"
#include "oracles.hpp"

using namespace reco;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << ": " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_failures;
}

void skip(const std::string& name, const std::string& reason) {
    std::cout << "SKIP: " << name << " (" << reason << ")" << std::endl;
}

std::optional<std::string> dataset_path(const char* env_var,
                                        std::initializer_list<const char*> fallbacks) {
    if (const char* p = std::getenv(env_var); p && std::filesystem::exists(p))
        return std::string(p);
    for (const char* p : fallbacks)
        if (std::filesystem::exists(p)) return std::string(p);
    return std::nullopt;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd random_matrix(int m, int n, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd a(m, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = dist(rng);
    return a;
}

std::vector<double*> parameter_coords(NcfParameters& p) {
    std::vector<double*> out;
    auto add = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
    };
    add(p.gmf_user);
    add(p.gmf_item);
    add(p.mlp_user);
    add(p.mlp_item);
    for (auto& w : p.mlp_weights) add(w);
    for (auto& b : p.mlp_biases)
        for (Eigen::Index i = 0; i < b.size(); ++i) out.push_back(b.data() + i);
    for (Eigen::Index i = 0; i < p.neumf_weights.size(); ++i)
        out.push_back(p.neumf_weights.data() + i);
    out.push_back(&p.output_bias);
    return out;
}

std::vector<double> flatten(const NcfParameters& g) {
    NcfParameters copy = g;
    std::vector<double> out;
    for (double* ptr : parameter_coords(copy)) out.push_back(*ptr);
    return out;
}

// 1. Ranking metrics agree with brute-force oracles on random instances.
void criterion_metric_oracles() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        int n_users = 2 + static_cast<int>(rng() % 9);
        int n_items = 2 + static_cast<int>(rng() % 9);
        std::vector<Interaction> rows;
        for (int u = 0; u < n_users; ++u)
            for (int i = 0; i < n_items; ++i)
                if (rng() % 3 != 0)
                    rows.push_back({u, i, 1.0 + static_cast<double>(rng() % 5), {}});
        if (rows.size() < 4) {
            --trial;
            continue;
        }
        Dataset d(rows, DatasetKind::explicit_ratings);
        SplitDataset sp = split(d, 0.7, rng());

        oracle::HashModel model;
        int k = 1 + static_cast<int>(rng() % 5);
        MetricReport lib = evaluate(model, sp, {k, std::nullopt});
        MetricReport ref = oracle::naive_evaluate(model, sp, k);
        for (const auto& name : metric_names())
            worst = std::max(worst,
                             std::abs(metric_value(lib, name) - metric_value(ref, name)));
    }
    std::ostringstream detail;
    detail << "max abs diff " << worst << ", " << elapsed_s(t0) << "s";
    report("metric oracle equivalence (50 random instances, tol 1e-12)",
           worst <= 1e-12 && elapsed_s(t0) < 10.0, detail.str());
}

// 2. Truncation error identity and Penrose identities on random matrices.
void criterion_svd_identities() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(211);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        int m = 2 + static_cast<int>(rng() % 29);
        int n = 2 + static_cast<int>(rng() % 19);
        Eigen::MatrixXd a = random_matrix(m, n, rng);
        SvdFactorization f = compact_svd(a);

        for (int k = 1; k < f.rank; ++k) {
            double err = (a - rank_k_approximation(f, k)).norm();
            double closed =
                std::sqrt(f.singular_values.tail(f.rank - k).squaredNorm());
            worst = std::max(worst, std::abs(err - closed));
        }
        Eigen::MatrixXd pinv = pseudoinverse(f);
        worst = std::max(worst, (a * pinv * a - a).norm());
        worst = std::max(worst, (pinv * a * pinv - pinv).norm());
        worst = std::max(worst, ((a * pinv).transpose() - a * pinv).norm());
        worst = std::max(worst, ((pinv * a).transpose() - pinv * a).norm());
    }
    std::ostringstream detail;
    detail << "max residual " << worst << ", " << elapsed_s(t0) << "s";
    report("svd truncation-error identity and Penrose identities (20 matrices, tol 1e-8)",
           worst <= 1e-8 && elapsed_s(t0) < 30.0, detail.str());
}

// 3. Hand-written backprop agrees with central finite differences. Checked
//    at well-scaled random parameters, rejecting draws whose pre-activations
//    sit within finite-difference reach of a ReLU kink.
void criterion_ncf_gradients() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(307);
    std::vector<NcfExample> batch = {{0, 0, 1.0}, {1, 1, 0.0}, {2, 2, 1.0}};
    NcfConfig cfg;
    cfg.latent_dim = 2;
    cfg.mlp_layers = {3, 2};
    double worst = 0.0;
    int checked = 0;
    while (checked < 20) {
        NcfParameters p = oracle::random_ncf_params(3, 3, 2, {3, 2}, rng);
        if (oracle::relu_margin(p, batch) < 1e-3) continue;
        ++checked;
        NcfModel model = NcfModel::from_parameters(
            p, cfg, {{0, 0}, {1, 1}, {2, 2}}, {{0, 0}, {1, 1}, {2, 2}});

        std::vector<double> analytic = flatten(model.gradient(batch));
        std::vector<double*> coords = parameter_coords(model.mutable_parameters());
        const double h = 1e-6;
        for (std::size_t i = 0; i < coords.size(); ++i) {
            double saved = *coords[i];
            *coords[i] = saved + h;
            double up = model.batch_loss(batch);
            *coords[i] = saved - h;
            double down = model.batch_loss(batch);
            *coords[i] = saved;
            double numeric = (up - down) / (2.0 * h);
            double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
            worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
        }
    }
    std::ostringstream detail;
    detail << "max rel err " << worst << ", " << elapsed_s(t0) << "s";
    report("ncf analytic gradient vs finite differences (20 draws, tol 1e-4)",
           worst < 1e-4 && elapsed_s(t0) < 60.0, detail.str());
}

Dataset synthetic_6x8() {
    std::vector<Interaction> rows;
    std::mt19937_64 rng(977);
    for (int u = 0; u < 6; ++u)
        for (int i = 0; i < 8; ++i)
            if ((u * 5 + i * 3) % 4 != 0)
                rows.push_back({u, i, 1.0 + static_cast<double>(rng() % 5), {}});
    return Dataset(rows, DatasetKind::explicit_ratings);
}

// 4. Influence records equal an independent delete-retrain pipeline and the
//    4-worker sweep reproduces the serial report byte for byte.
void criterion_influence_exactness() {
    auto t0 = std::chrono::steady_clock::now();
    Dataset d = synthetic_6x8();

    RunConfig svd_cfg;
    svd_cfg.model_kind = ModelKind::svd;
    svd_cfg.svd_rank = 2;
    svd_cfg.train_fraction = 0.7;
    svd_cfg.split_seed = 5;
    svd_cfg.metric_k = 3;

    SweepPlan plan;
    plan.master_seed = 19;
    InfluenceReport rep = influence_sweep_users(d, svd_cfg, plan);

    bool exact = rep.records.size() == d.n_users();
    SplitDataset base_split = split(d, svd_cfg.train_fraction, svd_cfg.split_seed);
    SvdRecommender base = SvdRecommender::fit(base_split.train, svd_cfg.svd_rank);
    double base_map = evaluate(base, base_split, {svd_cfg.metric_k, std::nullopt}).map;
    for (const auto& rec : rep.records) {
        if (rec.status != RecordStatus::ok) continue;
        Dataset deleted = delete_user(d, rec.entity_id);
        SplitDataset sp = split(deleted, svd_cfg.train_fraction, svd_cfg.split_seed);
        SvdRecommender m = SvdRecommender::fit(sp.train, svd_cfg.svd_rank);
        double map = evaluate(m, sp, {svd_cfg.metric_k, std::nullopt}).map;
        exact = exact && rec.baseline_eval == base_map && rec.deleted_eval == map &&
                rec.influence == base_map - map;
    }

    RunConfig ncf_cfg;
    ncf_cfg.model_kind = ModelKind::ncf;
    ncf_cfg.ncf.latent_dim = 2;
    ncf_cfg.ncf.mlp_layers = {4, 2};
    ncf_cfg.ncf.epochs = 2;
    ncf_cfg.ncf.batch_size = 8;
    ncf_cfg.ncf.negative_ratio = 1;
    ncf_cfg.train_fraction = 0.7;
    ncf_cfg.split_seed = 5;
    ncf_cfg.metric_k = 3;

    bool identical = true;
    for (ModelKind kind : {ModelKind::svd, ModelKind::ncf}) {
        RunConfig cfg = kind == ModelKind::svd ? svd_cfg : ncf_cfg;
        SweepPlan serial = plan;
        serial.workers = 1;
        SweepPlan parallel = plan;
        parallel.workers = 4;
        identical = identical &&
                    influence_report_to_csv(influence_sweep_users(d, cfg, serial)) ==
                        influence_report_to_csv(influence_sweep_users(d, cfg, parallel));
        identical = identical &&
                    influence_report_to_csv(influence_sweep_items(d, cfg, serial)) ==
                        influence_report_to_csv(influence_sweep_items(d, cfg, parallel));
    }

    std::ostringstream detail;
    detail << elapsed_s(t0) << "s";
    report("influence exactness and serial == 4-worker byte identity (6x8 synthetic)",
           exact && identical && elapsed_s(t0) < 300.0, detail.str());
}

// 5. Loaded corpus statistics match the published summary tables.
void criterion_dataset_fidelity() {
    const std::string name = "dataset summary fidelity (MovieLens 100K / Amazon)";
    auto ml = dataset_path("RECO_ML100K",
                           {"data/ml-100k/u.data", "/root/data/ml-100k/u.data"});
    auto az = dataset_path("RECO_AMAZON",
                           {"data/amazon/ratings.csv", "/root/data/amazon/ratings.csv"});
    if (!ml && !az) {
        skip(name, "no dataset files found; set RECO_ML100K and/or RECO_AMAZON");
        return;
    }
    bool ok = true;
    std::ostringstream detail;
    if (ml) {
        DatasetStats s = stats(load_movielens(*ml));
        ok = ok && s.n_ratings == 100000 && s.n_users == 943 && s.n_items == 1682 &&
             std::abs(s.density - 0.063) < 5e-4 && s.max_ratings_per_user == 737 &&
             s.avg_rating && std::abs(*s.avg_rating - 3.53) < 5e-3;
        detail << "ml-100k ratings=" << s.n_ratings << " users=" << s.n_users
               << " items=" << s.n_items;
    }
    if (az) {
        DatasetStats s = stats(load_amazon(*az));
        ok = ok && s.n_ratings == 168919 && s.n_users == 15551 && s.n_items == 9754;
        if (ml) detail << "; ";
        detail << "amazon ratings=" << s.n_ratings << " users=" << s.n_users
               << " items=" << s.n_items;
    }
    report(name, ok, detail.str());
}

// 6. Desk-scale directional replication: removing the most influential users
//    hurts MAP, removing the least influential ones does not hurt it as much.
void criterion_desk_scale() {
    const std::string name = "desk-scale directional ablation replication";
    auto ml = dataset_path("RECO_ML100K",
                           {"data/ml-100k/u.data", "/root/data/ml-100k/u.data"});
    if (!ml) {
        skip(name, "MovieLens file not found; set RECO_ML100K");
        return;
    }
    if (const char* flag = std::getenv("RECO_RUN_DESK_SCALE"); !flag || std::string(flag) != "1") {
        skip(name, "long-running; set RECO_RUN_DESK_SCALE=1 to enable");
        return;
    }
    Dataset d = load_movielens(*ml);
    RunConfig cfg;
    cfg.model_kind = ModelKind::svd;
    cfg.svd_rank = 10;
    SweepPlan plan;
    plan.master_seed = 42;
    plan.sample_size = 60;
    plan.workers = 4;
    InfluenceReport rep = influence_sweep_users(d, cfg, plan);

    AblationReport most = ablate(d, cfg, EntityKind::user,
                                 top_influencers(rep, 5, Direction::most_influential), 42,
                                 Direction::most_influential);
    AblationReport least = ablate(d, cfg, EntityKind::user,
                                  top_influencers(rep, 5, Direction::least_influential), 42,
                                  Direction::least_influential);
    double drop_most = most.before.map - most.after.map;
    double drop_least = least.before.map - least.after.map;
    std::ostringstream detail;
    detail << "map drop most=" << drop_most << " least=" << drop_least;
    report(name, drop_most > drop_least, detail.str());
}

// 7. End-to-end metric magnitudes on MovieLens sit in the published bands.
void criterion_magnitude_bands() {
    const std::string name = "movielens metric magnitude bands (ncf map in [0.02,0.09], svd map >= 0.3)";
    auto ml = dataset_path("RECO_ML100K",
                           {"data/ml-100k/u.data", "/root/data/ml-100k/u.data"});
    if (!ml) {
        skip(name, "MovieLens file not found; set RECO_ML100K");
        return;
    }
    Dataset d = load_movielens(*ml);

    RunConfig svd_cfg;
    svd_cfg.model_kind = ModelKind::svd;
    svd_cfg.svd_rank = 10;
    double svd_map = train_and_evaluate(d, svd_cfg, 42).map;

    RunConfig ncf_cfg;
    ncf_cfg.model_kind = ModelKind::ncf;
    double ncf_map = train_and_evaluate(d, ncf_cfg, 42).map;

    std::ostringstream detail;
    detail << "svd map=" << svd_map << " ncf map=" << ncf_map;
    report(name, svd_map >= 0.3 && ncf_map >= 0.02 && ncf_map <= 0.09, detail.str());
}

// 8. The cost projection is within 2x of a measured sweep.
void criterion_cost_model() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<Interaction> rows;
    std::mt19937_64 rng(555);
    for (int u = 0; u < 20; ++u)
        for (int i = 0; i < 12; ++i)
            if ((u + 2 * i) % 3 != 0)
                rows.push_back({u, i, 1.0 + static_cast<double>(rng() % 5), {}});
    Dataset d(rows, DatasetKind::explicit_ratings);

    RunConfig cfg;
    cfg.model_kind = ModelKind::svd;
    cfg.svd_rank = 3;
    cfg.train_fraction = 0.7;
    cfg.metric_k = 3;

    auto m0 = std::chrono::steady_clock::now();
    const int probes = 5;
    for (int p = 0; p < probes; ++p) train_and_evaluate(d, cfg, 42 + p);
    double t_train = elapsed_s(m0) / probes;

    double estimate = estimate_cost_seconds(d.n_users(), 1, t_train);

    auto s0 = std::chrono::steady_clock::now();
    SweepPlan plan;
    plan.master_seed = 71;
    plan.workers = 1;
    influence_sweep_users(d, cfg, plan);
    double actual = elapsed_s(s0);

    double ratio = estimate / actual;
    std::ostringstream detail;
    detail << "estimate=" << estimate << "s actual=" << actual << "s ratio=" << ratio
           << ", total " << elapsed_s(t0) << "s";
    report("cost projection within 2x of a measured 20-user sweep",
           ratio > 0.5 && ratio < 2.0, detail.str());
}

}  // namespace

int main() {
    criterion_metric_oracles();
    criterion_svd_identities();
    criterion_ncf_gradients();
    criterion_influence_exactness();
    criterion_dataset_fidelity();
    criterion_desk_scale();
    criterion_magnitude_bands();
    criterion_cost_model();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed" << std::endl;
        return 1;
    }
    return 0;
}
