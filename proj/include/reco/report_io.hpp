#ifndef RECO_REPORT_IO_HPP
#define RECO_REPORT_IO_HPP

#include <string>
#include <vector>

#include "reco/diagnostics.hpp"
#include "reco/svd.hpp"

namespace reco {

// Shortest round-trippable decimal form; identical across runs.
std::string format_double(double v);

std::string stats_to_json(const DatasetStats& s);
// Aligned two-column text table (metric name, value).
std::string stats_to_table(const DatasetStats& s);

std::string metric_report_to_json(const MetricReport& r);
std::string metric_report_to_table(const MetricReport& r);

// Canonical CSV: entity_id,kind,baseline,deleted,influence,seed,status.
// Wall times go to the separate timing CSV so reports stay byte-identical
// across reruns and worker counts.
std::string influence_report_to_csv(const InfluenceReport& r);
std::string influence_timing_to_csv(const InfluenceReport& r);
std::string influence_report_to_json(const InfluenceReport& r);
std::vector<InfluenceRecord> parse_influence_csv(const std::string& csv);

// (entity_index, influence) rows for bar plots.
std::string influence_plot_csv(const InfluenceReport& r);
// (entity_id, n_ratings) rows for histograms of ratings per entity.
std::string entity_histogram_csv(const Dataset& data, EntityKind kind);

std::string ablation_report_to_json(const AblationReport& r);
// Mirrors the comparison-table layout: metric, value without removed
// entities, original value, percent difference.
std::string ablation_report_to_table(const AblationReport& r);

// Factorization cache artifact: dimensions header + row-major matrices.
std::string svd_to_json(const SvdFactorization& f);
SvdFactorization svd_from_json(const std::string& text);

std::string ncf_checkpoint_to_json(const NcfModel& model);
std::string ncf_config_hash(const NcfConfig& cfg);
std::string loss_curve_csv(const std::vector<double>& losses);

std::string entity_kind_name(EntityKind kind);
std::string record_status_name(RecordStatus status);

}  // namespace reco

#endif  // RECO_REPORT_IO_HPP
