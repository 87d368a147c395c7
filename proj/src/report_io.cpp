#include "reco/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "reco/rng.hpp"

namespace reco {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    // Round-trippable shortest form.
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

namespace {

json stats_json_obj(const DatasetStats& s) {
    json j;
    j["n_ratings"] = s.n_ratings;
    j["n_items"] = s.n_items;
    j["n_users"] = s.n_users;
    j["density"] = s.density;
    j["avg_ratings_per_item"] = s.avg_ratings_per_item;
    j["avg_ratings_per_user"] = s.avg_ratings_per_user;
    j["min_ratings_per_item"] = s.min_ratings_per_item;
    j["min_ratings_per_user"] = s.min_ratings_per_user;
    j["max_ratings_per_item"] = s.max_ratings_per_item;
    j["max_ratings_per_user"] = s.max_ratings_per_user;
    if (s.avg_rating) j["avg_rating"] = *s.avg_rating;
    return j;
}

std::string two_column_table(const std::vector<std::pair<std::string, std::string>>& rows) {
    std::size_t width = 0;
    for (const auto& [name, _] : rows) width = std::max(width, name.size());
    std::ostringstream out;
    for (const auto& [name, value] : rows)
        out << std::left << std::setw(static_cast<int>(width)) << name << "  " << value << "\n";
    return out.str();
}

std::string round3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

json metric_json_obj(const MetricReport& r) {
    json j;
    j["map"] = r.map;
    j["map_at_k"] = r.map_at_k;
    j["ndcg"] = r.ndcg;
    j["precision_at_k"] = r.precision_at_k;
    j["recall_at_k"] = r.recall_at_k;
    j["explained_variance"] = r.explained_variance;
    j["mae"] = r.mae;
    j["k"] = r.k;
    return j;
}

MetricReport metric_from_json(const json& j) {
    MetricReport r;
    r.map = j.at("map");
    r.map_at_k = j.at("map_at_k");
    r.ndcg = j.at("ndcg");
    r.precision_at_k = j.at("precision_at_k");
    r.recall_at_k = j.at("recall_at_k");
    r.explained_variance = j.at("explained_variance");
    r.mae = j.at("mae");
    r.k = j.at("k");
    return r;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c));
    return m;
}

}  // namespace

std::string stats_to_json(const DatasetStats& s) { return stats_json_obj(s).dump(2) + "\n"; }

std::string stats_to_table(const DatasetStats& s) {
    std::vector<std::pair<std::string, std::string>> rows = {
        {"# Ratings", std::to_string(s.n_ratings)},
        {"# Items", std::to_string(s.n_items)},
        {"# Users", std::to_string(s.n_users)},
        {"Density", round3(s.density)},
        {"Average # ratings/item", format_double(std::round(s.avg_ratings_per_item * 100) / 100)},
        {"Average # ratings/user", format_double(std::round(s.avg_ratings_per_user * 100) / 100)},
        {"Min # ratings/item", std::to_string(s.min_ratings_per_item)},
        {"Min # ratings/user", std::to_string(s.min_ratings_per_user)},
        {"Max # ratings/item", std::to_string(s.max_ratings_per_item)},
        {"Max # ratings/user", std::to_string(s.max_ratings_per_user)},
    };
    if (s.avg_rating)
        rows.emplace_back("Average rating", format_double(std::round(*s.avg_rating * 100) / 100));
    return two_column_table(rows);
}

std::string metric_report_to_json(const MetricReport& r) {
    return metric_json_obj(r).dump(2) + "\n";
}

std::string metric_report_to_table(const MetricReport& r) {
    return two_column_table({
        {"MAP", format_double(r.map)},
        {"MAP@K", format_double(r.map_at_k)},
        {"NDCG", format_double(r.ndcg)},
        {"Precision@K", format_double(r.precision_at_k)},
        {"Recall@K", format_double(r.recall_at_k)},
        {"Explained Var", format_double(r.explained_variance)},
        {"MAE", format_double(r.mae)},
    });
}

std::string entity_kind_name(EntityKind kind) {
    return kind == EntityKind::user ? "user" : "item";
}

std::string record_status_name(RecordStatus status) {
    switch (status) {
        case RecordStatus::ok: return "ok";
        case RecordStatus::skipped: return "skipped";
        case RecordStatus::failed: return "failed";
    }
    return "unknown";
}

std::string influence_report_to_csv(const InfluenceReport& r) {
    std::ostringstream out;
    out << "entity_id,kind,baseline,deleted,influence,seed,status\n";
    for (const InfluenceRecord& rec : r.records) {
        out << rec.entity_id << ',' << entity_kind_name(rec.entity_kind) << ','
            << format_double(rec.baseline_eval) << ',' << format_double(rec.deleted_eval)
            << ',' << format_double(rec.influence) << ',' << rec.retrain_seed << ','
            << record_status_name(rec.status) << "\n";
    }
    return out.str();
}

std::string influence_timing_to_csv(const InfluenceReport& r) {
    std::ostringstream out;
    out << "entity_id,wall_time_ms\n";
    for (const InfluenceRecord& rec : r.records)
        out << rec.entity_id << ',' << format_double(rec.wall_time_ms) << "\n";
    return out.str();
}

std::string influence_report_to_json(const InfluenceReport& r) {
    json j;
    j["model_kind"] = r.model_kind == ModelKind::ncf ? "ncf" : "svd";
    j["entity_kind"] = entity_kind_name(r.entity_kind);
    j["metric"] = r.config.metric_name;
    j["dataset_fingerprint"] = r.dataset_fingerprint;
    j["baseline"] = metric_json_obj(r.baseline_report);
    json records = json::array();
    for (const InfluenceRecord& rec : r.records) {
        json o;
        o["entity_id"] = rec.entity_id;
        o["baseline_eval"] = rec.baseline_eval;
        o["deleted_eval"] = std::isnan(rec.deleted_eval) ? json() : json(rec.deleted_eval);
        o["influence"] = std::isnan(rec.influence) ? json() : json(rec.influence);
        o["seed"] = rec.retrain_seed;
        o["status"] = record_status_name(rec.status);
        records.push_back(std::move(o));
    }
    j["records"] = std::move(records);
    return j.dump(2) + "\n";
}

std::vector<InfluenceRecord> parse_influence_csv(const std::string& csv) {
    std::vector<InfluenceRecord> out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 7) throw ParseError("bad influence CSV row: " + line);
        InfluenceRecord rec;
        rec.entity_id = std::stoi(fields[0]);
        rec.entity_kind = fields[1] == "user" ? EntityKind::user : EntityKind::item;
        rec.baseline_eval = std::stod(fields[2]);
        rec.deleted_eval = std::stod(fields[3]);
        rec.influence = std::stod(fields[4]);
        rec.retrain_seed = std::stoull(fields[5]);
        rec.status = fields[6] == "ok"        ? RecordStatus::ok
                     : fields[6] == "skipped" ? RecordStatus::skipped
                                              : RecordStatus::failed;
        out.push_back(std::move(rec));
    }
    return out;
}

std::string influence_plot_csv(const InfluenceReport& r) {
    std::ostringstream out;
    out << "entity_index,entity_id,influence\n";
    for (std::size_t i = 0; i < r.records.size(); ++i)
        out << i << ',' << r.records[i].entity_id << ','
            << format_double(r.records[i].influence) << "\n";
    return out.str();
}

std::string entity_histogram_csv(const Dataset& data, EntityKind kind) {
    std::ostringstream out;
    out << "entity_id,n_ratings\n";
    const auto& index = kind == EntityKind::user ? data.user_index() : data.item_index();
    for (const auto& [id, positions] : index)
        out << id << ',' << positions.size() << "\n";
    return out.str();
}

std::string ablation_report_to_json(const AblationReport& r) {
    json j;
    j["removed_entities"] = r.removed_entities;
    j["entity_kind"] = entity_kind_name(r.entity_kind);
    j["direction"] = r.direction == Direction::most_influential ? "most_influential"
                                                                : "least_influential";
    j["before"] = metric_json_obj(r.before);
    j["after"] = metric_json_obj(r.after);
    j["percent_delta"] = r.percent_delta;
    return j.dump(2) + "\n";
}

std::string ablation_report_to_table(const AblationReport& r) {
    static const std::vector<std::pair<std::string, std::string>> labels = {
        {"map", "MAP"},           {"map_at_k", "MAP@K"},
        {"ndcg", "NDCG"},         {"precision_at_k", "Precision@K"},
        {"recall_at_k", "Recall@K"}, {"explained_variance", "Explained Var"},
        {"mae", "MAE"},
    };
    std::ostringstream out;
    out << std::left << std::setw(14) << "Metric" << std::setw(14) << "Without"
        << std::setw(14) << "Original" << "Difference\n";
    for (const auto& [key, label] : labels) {
        out << std::left << std::setw(14) << label << std::setw(14)
            << format_double(metric_value(r.after, key)) << std::setw(14)
            << format_double(metric_value(r.before, key));
        auto it = r.percent_delta.find(key);
        if (it != r.percent_delta.end()) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%+.2f%%", it->second);
            out << buf;
        } else {
            out << "n/a";
        }
        out << "\n";
    }
    return out.str();
}

std::string svd_to_json(const SvdFactorization& f) {
    json j;
    j["m"] = f.u_factors.rows();
    j["n"] = f.v_factors.rows();
    j["rank"] = f.rank;
    json sv = json::array();
    for (Eigen::Index i = 0; i < f.singular_values.size(); ++i)
        sv.push_back(f.singular_values[i]);
    j["singular_values"] = std::move(sv);
    j["u_factors"] = matrix_to_json(f.u_factors);
    j["v_factors"] = matrix_to_json(f.v_factors);
    return j.dump() + "\n";
}

SvdFactorization svd_from_json(const std::string& text) {
    json j = json::parse(text);
    SvdFactorization f;
    f.rank = j.at("rank");
    Eigen::Index m = j.at("m"), n = j.at("n");
    f.singular_values.resize(f.rank);
    for (int i = 0; i < f.rank; ++i)
        f.singular_values[i] = j.at("singular_values").at(static_cast<std::size_t>(i));
    f.u_factors = matrix_from_json(j.at("u_factors"), m, f.rank);
    f.v_factors = matrix_from_json(j.at("v_factors"), n, f.rank);
    return f;
}

std::string ncf_config_hash(const NcfConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<std::uint64_t>(cfg.latent_dim));
    for (int w : cfg.mlp_layers) mix(static_cast<std::uint64_t>(w));
    std::uint64_t bits;
    std::memcpy(&bits, &cfg.learning_rate, sizeof(bits));
    mix(bits);
    mix(static_cast<std::uint64_t>(cfg.batch_size));
    mix(static_cast<std::uint64_t>(cfg.epochs));
    mix(cfg.seed);
    mix(static_cast<std::uint64_t>(cfg.negative_ratio));
    mix(static_cast<std::uint64_t>(cfg.target_mode));
    mix(static_cast<std::uint64_t>(cfg.optimizer));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ncf_checkpoint_to_json(const NcfModel& model) {
    const NcfParameters& p = model.parameters();
    const NcfConfig& cfg = model.config();
    json j;
    j["config_hash"] = ncf_config_hash(cfg);
    j["config"] = {
        {"latent_dim", cfg.latent_dim},
        {"mlp_layers", cfg.mlp_layers},
        {"learning_rate", cfg.learning_rate},
        {"batch_size", cfg.batch_size},
        {"epochs", cfg.epochs},
        {"seed", cfg.seed},
        {"negative_ratio", cfg.negative_ratio},
    };
    json users = json::array(), items = json::array();
    for (const auto& [ext, dense] : model.user_map()) users.push_back({ext, dense});
    for (const auto& [ext, dense] : model.item_map()) items.push_back({ext, dense});
    j["user_map"] = std::move(users);
    j["item_map"] = std::move(items);
    j["gmf_user"] = matrix_to_json(p.gmf_user);
    j["gmf_item"] = matrix_to_json(p.gmf_item);
    j["mlp_user"] = matrix_to_json(p.mlp_user);
    j["mlp_item"] = matrix_to_json(p.mlp_item);
    json weights = json::array(), biases = json::array();
    for (const auto& w : p.mlp_weights) weights.push_back(matrix_to_json(w));
    for (const auto& b : p.mlp_biases) biases.push_back(matrix_to_json(b));
    j["mlp_weights"] = std::move(weights);
    j["mlp_biases"] = std::move(biases);
    j["neumf_weights"] = matrix_to_json(p.neumf_weights);
    j["output_bias"] = p.output_bias;
    return j.dump() + "\n";
}

std::string loss_curve_csv(const std::vector<double>& losses) {
    std::ostringstream out;
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        out << (i + 1) << ',' << format_double(losses[i]) << "\n";
    return out.str();
}

}  // namespace reco
