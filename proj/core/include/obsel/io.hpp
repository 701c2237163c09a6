#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "obsel/estimation.hpp"
#include "obsel/model.hpp"
#include "obsel/resilient.hpp"
#include "obsel/selection.hpp"
#include "obsel/sensitivity.hpp"

namespace obsel {

/// Shortest exact decimal form of a double; identical input bits give the
/// identical string, so emitted files are reproducible byte for byte.
std::string format_double(double v);

/// Throws ConfigError when `j` is not an object or carries a key outside
/// `allowed`. Used on every ingested document so typos fail loudly.
void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                  const std::string& context);

// --- model and catalog documents ---

/// Builds a model from its JSON description. Kinds: "linear" (explicit
/// "matrix" or seeded "generator"), "surrogate_ccp" (optional "params"
/// overrides), "custom" (explicit "matrix"). The seed feeds generated
/// matrices only.
SystemModel model_from_json(const nlohmann::json& doc, std::uint64_t seed);

/// Reads a sensor catalog. Either an explicit list, {"sensors": [{"id",
/// "label", "state" or "row", "cost"}, ...]}, or a generated one-per-state
/// form, {"identity": {"cost_mean", "cost_std", "cost_min", "cost_max"}},
/// whose costs are drawn from the seed's catalog-costs sub-stream and
/// clipped to the given range.
SensorCatalog catalog_from_json(const nlohmann::json& doc, int n, std::uint64_t seed);

// --- CSV artifacts ---

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          double sample_interval_minutes);

void write_sensitivity_csv(const std::string& path, const StackedSensitivity& S);

void write_selection_trace_csv(const std::string& path, const SelectionTrace& trace);

void write_resilient_trace_csv(const std::string& path,
                               const std::vector<ResilientRound>& rounds);

void write_frontier_csv(const std::string& path, const std::vector<FrontierPoint>& points);

void write_estimate_csv(const std::string& path, const Trajectory& truth,
                        const std::vector<VectorXd>& estimates);

// --- JSON artifacts ---

nlohmann::json selection_result_to_json(const SelectionState& state,
                                        const SelectionConfig& config,
                                        SelectionStatus status);
void write_selection_result_json(const std::string& path, const SelectionState& state,
                                 const SelectionConfig& config, SelectionStatus status);
/// Reads back a result document written by write_selection_result_json.
SelectionState selection_result_from_json(const nlohmann::json& doc);

nlohmann::json resilient_result_to_json(const ResilientResult& result);
void write_resilient_result_json(const std::string& path, const ResilientResult& result);

nlohmann::json comparison_report_to_json(const ComparisonReport& report);
void write_comparison_report_json(const std::string& path, const ComparisonReport& report);

/// Writes `doc` with sorted keys and a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace obsel
