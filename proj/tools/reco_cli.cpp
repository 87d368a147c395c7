// Command-line driver: dataset stats, train/evaluate, influence sweeps,
// ablations, and sweep cost projection. All outputs are deterministic for a
// fixed config; timestamps and wall times go to the run log only.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "reco/diagnostics.hpp"
#include "reco/report_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ExperimentConfig {
    std::string dataset_path;
    std::string dataset_format = "movielens";  // movielens | amazon
    reco::RunConfig run;
    std::uint64_t master_seed = 42;
    int workers = 1;
    std::optional<std::size_t> sample_size;
    std::vector<int> entities;
    bool shared_seed = false;
    std::string output_dir = "out";
};

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw reco::ParseError("cannot open config: " + path);
    json j = json::parse(in);

    ExperimentConfig cfg;
    if (j.contains("dataset")) {
        cfg.dataset_path = j["dataset"].value("path", "");
        cfg.dataset_format = j["dataset"].value("format", "movielens");
    }
    if (j.contains("model")) {
        const json& m = j["model"];
        std::string kind = m.value("kind", "ncf");
        cfg.run.model_kind = kind == "svd" ? reco::ModelKind::svd : reco::ModelKind::ncf;
        cfg.run.svd_rank = m.value("svd_rank", 10);
        std::string fill = m.value("svd_fill", "user_mean");
        cfg.run.svd_fill = fill == "global_mean" ? reco::FillPolicy::global_mean
                           : fill == "zero"      ? reco::FillPolicy::zero
                                                 : reco::FillPolicy::user_mean;
        if (m.contains("ncf")) {
            const json& n = m["ncf"];
            cfg.run.ncf.latent_dim = n.value("latent_dim", 4);
            cfg.run.ncf.mlp_layers = n.value("mlp_layers", std::vector<int>{16, 8, 4});
            cfg.run.ncf.learning_rate = n.value("learning_rate", 1e-3);
            cfg.run.ncf.batch_size = n.value("batch_size", 256);
            cfg.run.ncf.epochs = n.value("epochs", 10);
            cfg.run.ncf.negative_ratio = n.value("negative_ratio", 4);
            cfg.run.ncf.target_mode = n.value("target_mode", "binary") == "scaled_rating"
                                          ? reco::NcfTargetMode::scaled_rating
                                          : reco::NcfTargetMode::binary;
            cfg.run.ncf.optimizer = n.value("optimizer", "sgd") == "adam"
                                        ? reco::NcfOptimizer::adam
                                        : reco::NcfOptimizer::sgd;
        }
    }
    if (j.contains("split")) {
        cfg.run.train_fraction = j["split"].value("fraction", 0.75);
        cfg.run.split_seed = j["split"].value("seed", 42ULL);
        cfg.run.per_user_stratified = j["split"].value("per_user_stratified", false);
    }
    if (j.contains("metric")) {
        cfg.run.metric_k = j["metric"].value("k", 10);
        cfg.run.metric_name = j["metric"].value("name", "map");
        if (j["metric"].contains("relevance_threshold") &&
            !j["metric"]["relevance_threshold"].is_null())
            cfg.run.relevance_threshold = j["metric"]["relevance_threshold"].get<double>();
    }
    if (j.contains("negative_ratio"))
        cfg.run.negative_ratio = j["negative_ratio"].get<int>();
    if (j.contains("sweep")) {
        cfg.workers = j["sweep"].value("workers", 1);
        if (j["sweep"].contains("sample_size") && !j["sweep"]["sample_size"].is_null())
            cfg.sample_size = j["sweep"]["sample_size"].get<std::size_t>();
        cfg.entities = j["sweep"].value("entities", std::vector<int>{});
        cfg.shared_seed = j["sweep"].value("shared_seed", false);
    }
    cfg.master_seed = j.value("seed", 42ULL);
    cfg.output_dir = j.value("output_dir", "out");
    return cfg;
}

reco::Dataset load_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset_format == "amazon") return reco::load_amazon(cfg.dataset_path);
    return reco::load_movielens(cfg.dataset_path);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void append_run_log(const ExperimentConfig& cfg, const std::string& line) {
    fs::create_directories(cfg.output_dir);
    std::ofstream out(fs::path(cfg.output_dir) / "run_log.txt", std::ios::app);
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%F %T", std::gmtime(&now));
    out << buf << " " << line << "\n";
}

reco::SweepPlan make_plan(const ExperimentConfig& cfg, reco::EntityKind kind) {
    reco::SweepPlan plan;
    plan.entity_kind = kind;
    plan.entities = cfg.entities;
    plan.sample_size = cfg.sample_size;
    plan.workers = cfg.workers;
    plan.master_seed = cfg.master_seed;
    plan.shared_seed = cfg.shared_seed;
    return plan;
}

int cmd_stats(const ExperimentConfig& cfg) {
    reco::Dataset data = load_dataset(cfg);
    reco::DatasetStats s = reco::stats(data);
    write_file(fs::path(cfg.output_dir) / "stats.json", reco::stats_to_json(s));
    write_file(fs::path(cfg.output_dir) / "stats.txt", reco::stats_to_table(s));
    std::cout << reco::stats_to_table(s);
    append_run_log(cfg, "stats " + cfg.dataset_path);
    return 0;
}

int cmd_train_eval(const ExperimentConfig& cfg) {
    reco::Dataset data = load_dataset(cfg);

    reco::Dataset working = data;
    if (data.kind() == reco::DatasetKind::implicit_feedback && cfg.run.negative_ratio > 0)
        working = reco::negative_sample(data, cfg.run.negative_ratio, cfg.master_seed);
    reco::SplitDataset sp = reco::split(working, cfg.run.train_fraction,
                                        cfg.run.split_seed, cfg.run.per_user_stratified);

    reco::EvaluateOptions opts;
    opts.k = cfg.run.metric_k;
    opts.relevance_threshold = cfg.run.relevance_threshold;

    reco::MetricReport report;
    if (cfg.run.model_kind == reco::ModelKind::svd) {
        auto model = reco::SvdRecommender::fit(sp.train, cfg.run.svd_rank, cfg.run.svd_fill);
        report = reco::evaluate(model, sp, opts);
    } else {
        reco::NcfConfig ncf_cfg = cfg.run.ncf;
        ncf_cfg.seed = cfg.master_seed;
        reco::NcfModel model = reco::NcfModel::train(sp.train, ncf_cfg);
        report = reco::evaluate(model, sp, opts);
        write_file(fs::path(cfg.output_dir) / "ncf_checkpoint.json",
                   reco::ncf_checkpoint_to_json(model));
        write_file(fs::path(cfg.output_dir) / "loss_curve.csv",
                   reco::loss_curve_csv(model.loss_history()));
    }
    write_file(fs::path(cfg.output_dir) / "metrics.json", reco::metric_report_to_json(report));
    write_file(fs::path(cfg.output_dir) / "metrics.txt", reco::metric_report_to_table(report));
    std::cout << reco::metric_report_to_table(report);
    append_run_log(cfg, "train-eval");
    return 0;
}

int cmd_influence(const ExperimentConfig& cfg, reco::EntityKind kind) {
    reco::Dataset data = load_dataset(cfg);
    reco::SweepPlan plan = make_plan(cfg, kind);
    reco::InfluenceReport report =
        kind == reco::EntityKind::user ? reco::influence_sweep_users(data, cfg.run, plan)
                                       : reco::influence_sweep_items(data, cfg.run, plan);

    std::string base = "influence_" + reco::entity_kind_name(kind) + "s";
    write_file(fs::path(cfg.output_dir) / (base + ".csv"),
               reco::influence_report_to_csv(report));
    write_file(fs::path(cfg.output_dir) / (base + ".json"),
               reco::influence_report_to_json(report));
    write_file(fs::path(cfg.output_dir) / (base + "_plot.csv"),
               reco::influence_plot_csv(report));
    write_file(fs::path(cfg.output_dir) / (base + "_histogram.csv"),
               reco::entity_histogram_csv(data, kind));
    write_file(fs::path(cfg.output_dir) / (base + "_timing.csv"),
               reco::influence_timing_to_csv(report));
    append_run_log(cfg, "influence sweep " + base + ", " +
                            std::to_string(report.records.size()) + " entities");
    std::cout << "wrote " << report.records.size() << " influence records to "
              << cfg.output_dir << "/" << base << ".csv\n";
    return 0;
}

int cmd_ablate(const ExperimentConfig& cfg, const std::string& kind_name,
               const std::string& direction_name, int n, const std::string& report_path) {
    reco::EntityKind kind =
        kind_name == "items" ? reco::EntityKind::item : reco::EntityKind::user;
    reco::Direction direction = direction_name == "least"
                                    ? reco::Direction::least_influential
                                    : reco::Direction::most_influential;

    fs::path csv_path = report_path.empty()
        ? fs::path(cfg.output_dir) / ("influence_" + reco::entity_kind_name(kind) + "s.csv")
        : fs::path(report_path);
    std::ifstream in(csv_path);
    if (!in) {
        std::cerr << "influence report not found: " << csv_path << "\n";
        return 2;
    }
    std::string csv((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    reco::InfluenceReport parsed;
    parsed.records = reco::parse_influence_csv(csv);
    parsed.entity_kind = kind;

    std::vector<int> entities;
    if (n > 0) entities = reco::top_influencers(parsed, n, direction);

    reco::Dataset data = load_dataset(cfg);
    reco::AblationReport ab =
        reco::ablate(data, cfg.run, kind, entities, cfg.master_seed, direction);

    std::string base = "ablation_" + direction_name + "_" + kind_name;
    write_file(fs::path(cfg.output_dir) / (base + ".json"),
               reco::ablation_report_to_json(ab));
    write_file(fs::path(cfg.output_dir) / (base + ".txt"),
               reco::ablation_report_to_table(ab));
    std::cout << reco::ablation_report_to_table(ab);
    append_run_log(cfg, "ablate " + base);
    return 0;
}

int cmd_cost_estimate(const ExperimentConfig& cfg, std::size_t n_entities,
                      double t_train_seconds) {
    if (t_train_seconds <= 0.0) {
        // Measure one pipeline run.
        reco::Dataset data = load_dataset(cfg);
        auto t0 = std::chrono::steady_clock::now();
        reco::train_and_evaluate(data, cfg.run, cfg.master_seed);
        t_train_seconds = std::chrono::duration<double>(
            std::chrono::steady_clock::now() - t0).count();
    }
    double projected = reco::estimate_cost_seconds(n_entities, cfg.workers, t_train_seconds);
    json j;
    j["n_entities"] = n_entities;
    j["workers"] = cfg.workers;
    j["measured_t_train_seconds"] = t_train_seconds;
    j["projected_seconds"] = projected;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recommender deletion diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "experiment config JSON")->required();

    std::optional<int> workers_flag, k_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::size_t> sample_flag;
    std::string output_dir_flag, metric_flag;
    app.add_option("--workers", workers_flag, "sweep worker count");
    app.add_option("--seed", seed_flag, "master seed");
    app.add_option("--output-dir", output_dir_flag, "output directory");
    app.add_option("--metric", metric_flag, "influence metric name");
    app.add_option("--k", k_flag, "ranking cutoff K");
    app.add_option("--sample-size", sample_flag, "sweep entity subsample size");

    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
    auto* train_cmd = app.add_subcommand("train-eval", "train a model and evaluate it");
    auto* inf_users_cmd = app.add_subcommand("influence-users", "leave-one-user-out sweep");
    auto* inf_items_cmd = app.add_subcommand("influence-items", "leave-one-item-out sweep");

    auto* ablate_cmd = app.add_subcommand("ablate", "remove top-N entities and retrain");
    std::string ablate_kind = "users", ablate_direction = "most", ablate_report;
    int ablate_n = 10;
    ablate_cmd->add_option("--kind", ablate_kind, "users|items");
    ablate_cmd->add_option("--direction", ablate_direction, "most|least");
    ablate_cmd->add_option("--n", ablate_n, "number of entities to remove");
    ablate_cmd->add_option("--report", ablate_report, "influence CSV path");

    auto* cost_cmd = app.add_subcommand("cost-estimate", "project sweep wall time");
    std::size_t cost_entities = 0;
    double cost_t_train = 0.0;
    cost_cmd->add_option("--entities", cost_entities, "entity count")->required();
    cost_cmd->add_option("--t-train", cost_t_train,
                         "measured per-entity train time (seconds); measured in-run if absent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (workers_flag) cfg.workers = *workers_flag;
        if (seed_flag) cfg.master_seed = *seed_flag;
        if (!output_dir_flag.empty()) cfg.output_dir = output_dir_flag;
        if (!metric_flag.empty()) cfg.run.metric_name = metric_flag;
        if (k_flag) cfg.run.metric_k = *k_flag;
        if (sample_flag) cfg.sample_size = *sample_flag;

        if (stats_cmd->parsed()) return cmd_stats(cfg);
        if (train_cmd->parsed()) return cmd_train_eval(cfg);
        if (inf_users_cmd->parsed()) return cmd_influence(cfg, reco::EntityKind::user);
        if (inf_items_cmd->parsed()) return cmd_influence(cfg, reco::EntityKind::item);
        if (ablate_cmd->parsed())
            return cmd_ablate(cfg, ablate_kind, ablate_direction, ablate_n, ablate_report);
        if (cost_cmd->parsed()) return cmd_cost_estimate(cfg, cost_entities, cost_t_train);
        return 2;
    } catch (const reco::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
