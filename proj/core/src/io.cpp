#include "obsel/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <system_error>

#include "obsel/errors.hpp"
#include "obsel/rng.hpp"
#include "obsel/surrogate.hpp"

namespace obsel {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw NumericalError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                  const std::string& context) {
  if (!j.is_object())
    throw ConfigError(context + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const std::string& key : allowed)
      if (item.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(context + ": unknown field \"" + item.key() + "\"");
  }
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  return out;
}

double number_at(const nlohmann::json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(ctx + ": missing numeric field \"" + key + "\"");
  return j.at(key).get<double>();
}

MatrixXd matrix_from_json(const nlohmann::json& rows, const std::string& ctx) {
  if (!rows.is_array() || rows.empty())
    throw ConfigError(ctx + ": matrix must be a non-empty array of rows");
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.at(0).size());
  MatrixXd A(r, c);
  for (int i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != c)
      throw ConfigError(ctx + ": ragged matrix rows");
    for (int j = 0; j < c; ++j) {
      const auto& v = row.at(static_cast<std::size_t>(j));
      if (!v.is_number()) throw ConfigError(ctx + ": matrix entries must be numbers");
      A(i, j) = v.get<double>();
    }
  }
  return A;
}

std::array<double, 4> quad_from_json(const nlohmann::json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 4)
    throw ConfigError(ctx + ": expected an array of 4 numbers");
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] =
      v.at(static_cast<std::size_t>(i)).get<double>();
  return out;
}

SurrogateParams surrogate_params_from_json(const nlohmann::json& j) {
  SurrogateParams p;
  require_keys(j, {"stages", "substeps", "sample_interval_minutes",
                   "liquid_stage_volume", "gas_stage_volume", "hx_tube_volume",
                   "hx_shell_volume", "reboiler_volume", "cp_liquid", "cp_gas",
                   "cp_volumetric", "k_absorber", "eq_absorber", "k_desorber",
                   "eq_desorber", "temp_sensitivity", "heat_transfer", "transfer_heat",
                   "mea_activity", "h2o_activity",
                   "flue_conc", "flue_temp", "lean_conc_n2", "lean_conc_mea",
                   "lean_conc_h2o", "lean_co2_base", "lean_co2_slope", "ref_temp",
                   "frac_weight", "frac_co2_slope", "vap_temp", "vap_width",
                   "vap_flow_gain", "vap_flow_min", "volatility", "vap_conc_total",
                   "evap_energy", "hx_ua", "trim_cool_ua", "trim_cool_temp",
                   "isolated_columns", "iso_liquid_conc",
                   "iso_liquid_temp", "iso_vapor_conc"},
               "surrogate params");
  auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  auto quad = [&](const char* key, std::array<double, 4>& field) {
    if (j.contains(key)) field = quad_from_json(j.at(key), key);
  };
  if (j.contains("stages")) p.stages = j.at("stages").get<int>();
  if (j.contains("substeps")) p.substeps = j.at("substeps").get<int>();
  num("sample_interval_minutes", p.sample_interval_minutes);
  num("liquid_stage_volume", p.liquid_stage_volume);
  num("gas_stage_volume", p.gas_stage_volume);
  num("hx_tube_volume", p.hx_tube_volume);
  num("hx_shell_volume", p.hx_shell_volume);
  num("reboiler_volume", p.reboiler_volume);
  quad("cp_liquid", p.cp_liquid);
  quad("cp_gas", p.cp_gas);
  num("cp_volumetric", p.cp_volumetric);
  quad("k_absorber", p.k_absorber);
  quad("eq_absorber", p.eq_absorber);
  quad("k_desorber", p.k_desorber);
  quad("eq_desorber", p.eq_desorber);
  num("temp_sensitivity", p.temp_sensitivity);
  num("heat_transfer", p.heat_transfer);
  quad("transfer_heat", p.transfer_heat);
  num("mea_activity", p.mea_activity);
  num("h2o_activity", p.h2o_activity);
  quad("flue_conc", p.flue_conc);
  num("flue_temp", p.flue_temp);
  num("lean_conc_n2", p.lean_conc_n2);
  num("lean_conc_mea", p.lean_conc_mea);
  num("lean_conc_h2o", p.lean_conc_h2o);
  num("lean_co2_base", p.lean_co2_base);
  num("lean_co2_slope", p.lean_co2_slope);
  num("ref_temp", p.ref_temp);
  quad("frac_weight", p.frac_weight);
  num("frac_co2_slope", p.frac_co2_slope);
  num("vap_temp", p.vap_temp);
  num("vap_width", p.vap_width);
  num("vap_flow_gain", p.vap_flow_gain);
  num("vap_flow_min", p.vap_flow_min);
  quad("volatility", p.volatility);
  num("vap_conc_total", p.vap_conc_total);
  num("evap_energy", p.evap_energy);
  num("hx_ua", p.hx_ua);
  num("trim_cool_ua", p.trim_cool_ua);
  num("trim_cool_temp", p.trim_cool_temp);
  if (j.contains("isolated_columns"))
    p.isolated_columns = j.at("isolated_columns").get<bool>();
  quad("iso_liquid_conc", p.iso_liquid_conc);
  num("iso_liquid_temp", p.iso_liquid_temp);
  quad("iso_vapor_conc", p.iso_vapor_conc);
  return p;
}

void apply_labels(SystemModel& model, const nlohmann::json& doc) {
  if (!doc.contains("labels")) return;
  const auto& labels = doc.at("labels");
  if (!labels.is_array() || static_cast<int>(labels.size()) != model.n)
    throw ConfigError("model: labels must list one name per state");
  model.labels.clear();
  for (const auto& v : labels) model.labels.push_back(v.get<std::string>());
}

}  // namespace

SystemModel model_from_json(const nlohmann::json& doc, std::uint64_t seed) {
  if (!doc.is_object() || !doc.contains("kind"))
    throw ConfigError("model: missing \"kind\"");
  const std::string kind = doc.at("kind").get<std::string>();

  if (kind == "linear" || kind == "custom") {
    require_keys(doc, {"kind", "n", "matrix", "generator", "sample_interval_minutes",
                       "labels"},
                 "model(" + kind + ")");
    if (doc.contains("matrix") && doc.contains("generator"))
      throw ConfigError("model: give either \"matrix\" or \"generator\", not both");
    SystemModel model;
    if (doc.contains("matrix")) {
      MatrixXd A = matrix_from_json(doc.at("matrix"), "model");
      if (A.rows() != A.cols()) throw ConfigError("model: matrix must be square");
      model = make_linear_model(A);
    } else if (doc.contains("generator")) {
      const auto& gen = doc.at("generator");
      require_keys(gen, {"off_diag_fraction"}, "model generator");
      RandomLinearSpec spec;
      if (!doc.contains("n")) throw ConfigError("model: generator needs \"n\"");
      spec.n = doc.at("n").get<int>();
      if (gen.contains("off_diag_fraction"))
        spec.off_diag_fraction = gen.at("off_diag_fraction").get<double>();
      model = generate_random_linear(spec, substream_seed(seed, "model"));
    } else {
      throw ConfigError("model: \"" + kind + "\" needs \"matrix\" or \"generator\"");
    }
    if (doc.contains("n") && doc.at("n").get<int>() != model.n)
      throw ConfigError("model: \"n\" does not match the matrix size");
    if (doc.contains("sample_interval_minutes"))
      model.sample_interval_minutes = number_at(doc, "sample_interval_minutes", "model");
    apply_labels(model, doc);
    return model;
  }

  if (kind == "surrogate_ccp") {
    require_keys(doc, {"kind", "params", "labels"}, "model(surrogate_ccp)");
    SurrogateParams params;
    if (doc.contains("params")) params = surrogate_params_from_json(doc.at("params"));
    SystemModel model = surrogate_ccp(params);
    apply_labels(model, doc);
    return model;
  }

  throw ConfigError("model: unknown kind \"" + kind + "\"");
}

SensorCatalog catalog_from_json(const nlohmann::json& doc, int n, std::uint64_t seed) {
  require_keys(doc, {"sensors", "identity"}, "catalog");
  if (doc.contains("identity")) {
    const auto& gen = doc.at("identity");
    require_keys(gen, {"cost_mean", "cost_std", "cost_min", "cost_max"}, "catalog identity");
    const double mean = number_at(gen, "cost_mean", "catalog identity");
    const double std_dev = number_at(gen, "cost_std", "catalog identity");
    const double lo = number_at(gen, "cost_min", "catalog identity");
    const double hi = number_at(gen, "cost_max", "catalog identity");
    if (!(std_dev >= 0.0) || !(lo <= hi) || !(lo > 0.0))
      throw ConfigError("catalog identity: need cost_std >= 0 and 0 < cost_min <= cost_max");
    std::mt19937_64 engine = substream_engine(seed, "catalog-costs");
    std::normal_distribution<double> draw(mean, std_dev);
    SensorCatalog cat;
    for (int i = 1; i <= n; ++i) {
      Sensor s;
      s.id = i;
      s.label = "x" + std::to_string(i);
      s.state_index = i;
      s.cost = std::clamp(draw(engine), lo, hi);
      cat.sensors.push_back(std::move(s));
    }
    cat.validate(n);
    return cat;
  }
  if (!doc.contains("sensors") || !doc.at("sensors").is_array())
    throw ConfigError("catalog: missing \"sensors\" array");
  SensorCatalog cat;
  for (const auto& sj : doc.at("sensors")) {
    require_keys(sj, {"id", "label", "state", "row", "cost"}, "catalog sensor");
    Sensor s;
    s.id = static_cast<int>(number_at(sj, "id", "catalog sensor"));
    if (sj.contains("label")) s.label = sj.at("label").get<std::string>();
    if (sj.contains("state") && sj.contains("row"))
      throw ConfigError("catalog: sensor " + std::to_string(s.id) +
                        " gives both \"state\" and \"row\"");
    if (sj.contains("state")) {
      s.state_index = static_cast<int>(number_at(sj, "state", "catalog sensor"));
    } else if (sj.contains("row")) {
      const auto& row = sj.at("row");
      if (!row.is_array()) throw ConfigError("catalog: \"row\" must be an array");
      s.row.resize(static_cast<Eigen::Index>(row.size()));
      for (std::size_t i = 0; i < row.size(); ++i)
        s.row(static_cast<Eigen::Index>(i)) = row.at(i).get<double>();
    } else {
      throw ConfigError("catalog: sensor " + std::to_string(s.id) +
                        " needs \"state\" or \"row\"");
    }
    s.cost = number_at(sj, "cost", "catalog sensor");
    cat.sensors.push_back(std::move(s));
  }
  cat.validate(n);
  return cat;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          double sample_interval_minutes) {
  std::ofstream out = open_out(path);
  if (traj.states.empty()) throw ConfigError("write_trajectory_csv: empty trajectory");
  const int n = static_cast<int>(traj.states.front().size());
  out << "step,t_minutes";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  out << "\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << k << "," << format_double(static_cast<double>(k) * sample_interval_minutes);
    for (int i = 0; i < n; ++i) out << "," << format_double(traj.states[k](i));
    out << "\n";
  }
}

void write_sensitivity_csv(const std::string& path, const StackedSensitivity& S) {
  std::ofstream out = open_out(path);
  const int n = S.cols();
  out << "sensor_id,k";
  for (int i = 1; i <= n; ++i) out << ",s_" << i;
  out << "\n";
  for (int r = 0; r < S.rows(); ++r) {
    out << S.row_sensor[static_cast<std::size_t>(r)] << ","
        << S.row_time[static_cast<std::size_t>(r)];
    for (int i = 0; i < n; ++i) out << "," << format_double(S.S(r, i));
    out << "\n";
  }
}

void write_selection_trace_csv(const std::string& path, const SelectionTrace& trace) {
  std::ofstream out = open_out(path);
  out << "m,removed_set,lambda,c_actual,cpi,removed_sensor\n";
  for (const SelectionStep& st : trace.steps) {
    out << st.set_size << ",\"{";
    for (std::size_t i = 0; i < st.removed_set.size(); ++i) {
      if (i) out << ",";
      out << st.removed_set[i];
    }
    out << "}\"," << format_double(st.lambda) << "," << format_double(st.cost) << ","
        << format_double(st.cpi) << ",";
    if (st.removed_sensor > 0) out << st.removed_sensor;
    out << "\n";
  }
}

void write_resilient_trace_csv(const std::string& path,
                               const std::vector<ResilientRound>& rounds) {
  std::ofstream out = open_out(path);
  out << "round,candidate_id,worst_lambda,chosen\n";
  for (const ResilientRound& r : rounds)
    for (const auto& [id, worst] : r.candidate_worst)
      out << r.round << "," << id << "," << format_double(worst) << ","
          << (id == r.chosen_id ? 1 : 0) << "\n";
}

void write_frontier_csv(const std::string& path, const std::vector<FrontierPoint>& points) {
  std::ofstream out = open_out(path);
  out << "alpha,size,lambda,cost\n";
  for (const FrontierPoint& p : points)
    out << format_double(p.alpha) << "," << p.size << ","
        << format_double(p.feasible ? p.lambda : 0.0) << ","
        << format_double(p.feasible ? p.cost : 0.0) << "\n";
}

void write_estimate_csv(const std::string& path, const Trajectory& truth,
                        const std::vector<VectorXd>& estimates) {
  std::ofstream out = open_out(path);
  if (truth.states.size() != estimates.size())
    throw ConfigError("write_estimate_csv: length mismatch");
  const int n = static_cast<int>(truth.states.front().size());
  out << "step";
  for (int i = 1; i <= n; ++i) out << ",x_true_" << i;
  for (int i = 1; i <= n; ++i) out << ",x_hat_" << i;
  out << "\n";
  for (std::size_t k = 0; k < truth.states.size(); ++k) {
    out << k;
    for (int i = 0; i < n; ++i) out << "," << format_double(truth.states[k](i));
    for (int i = 0; i < n; ++i) out << "," << format_double(estimates[k](i));
    out << "\n";
  }
}

nlohmann::json selection_result_to_json(const SelectionState& state,
                                        const SelectionConfig& config,
                                        SelectionStatus status) {
  nlohmann::json doc;
  doc["selected_ids"] = state.selected_ids;
  doc["cost"] = state.cost;
  doc["lambda"] = state.lambda;
  doc["cpi"] = state.cpi;
  doc["alpha"] = config.alpha;
  doc["budget"] = config.budget;
  doc["status"] = (status == SelectionStatus::BudgetMet) ? "budget_met" : "infeasible";
  return doc;
}

void write_selection_result_json(const std::string& path, const SelectionState& state,
                                 const SelectionConfig& config, SelectionStatus status) {
  write_json_file(path, selection_result_to_json(state, config, status));
}

SelectionState selection_result_from_json(const nlohmann::json& doc) {
  require_keys(doc, {"selected_ids", "cost", "lambda", "cpi", "alpha", "budget", "status"},
               "selection result");
  SelectionState st;
  st.selected_ids = doc.at("selected_ids").get<std::vector<int>>();
  st.cost = number_at(doc, "cost", "selection result");
  st.lambda = number_at(doc, "lambda", "selection result");
  st.cpi = number_at(doc, "cpi", "selection result");
  st.observable = st.lambda > 0.0;
  return st;
}

nlohmann::json resilient_result_to_json(const ResilientResult& result) {
  nlohmann::json doc;
  doc["base_ids"] = result.base_ids;
  doc["added_ids"] = result.added_ids;
  doc["extra_cost"] = result.extra_cost;
  doc["worst_lambda"] = result.worst_lambda;
  doc["R"] = result.failures;
  return doc;
}

void write_resilient_result_json(const std::string& path, const ResilientResult& result) {
  write_json_file(path, resilient_result_to_json(result));
}

nlohmann::json comparison_report_to_json(const ComparisonReport& report) {
  auto case_json = [](const ComparisonCase& c) {
    nlohmann::json j;
    j["ids"] = c.ids;
    j["cost"] = c.cost;
    j["lambda"] = c.lambda;
    j["rmse_total"] = c.rmse_total;
    return j;
  };
  nlohmann::json doc;
  doc["selected"] = case_json(report.selected);
  doc["alternatives"] = nlohmann::json::array();
  for (const ComparisonCase& c : report.alternatives)
    doc["alternatives"].push_back(case_json(c));
  doc["selected_rank"] = report.selected_rank;
  doc["median_alternative_rmse"] = report.median_alternative_rmse;
  doc["requested_trials"] = report.requested_trials;
  return doc;
}

void write_comparison_report_json(const std::string& path, const ComparisonReport& report) {
  write_json_file(path, comparison_report_to_json(report));
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return doc;
}

}  // namespace obsel
