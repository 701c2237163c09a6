// obsel: command line front end for budget-constrained sensor selection.
//
// Verbs: select, resilient, sweep-alpha, estimate, oracle-check. Every run
// ingests one JSON config, validates it fully before computing, and writes
// its artifacts into --out. All randomness flows from the single run seed
// through named sub-streams, so identical config + seed gives byte-identical
// output files regardless of thread count.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "obsel/errors.hpp"
#include "obsel/estimation.hpp"
#include "obsel/io.hpp"
#include "obsel/model.hpp"
#include "obsel/resilient.hpp"
#include "obsel/rng.hpp"
#include "obsel/selection.hpp"

namespace {

using nlohmann::json;

/// Everything a run needs, parsed and range-checked before any computation.
struct RunConfig {
  std::uint64_t seed = 0;
  json model;
  json catalog;
  obsel::SelectionConfig selection;
  bool has_budget = false;
  obsel::ResilientConfig resilient;
  bool has_resilient = false;
  int estimate_horizon = 150;
  int estimate_trials = 2;
  bool has_estimate = false;
  std::vector<double> sweep_alphas;
  std::vector<int> sweep_sizes;
  bool has_sweep = false;
};

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool oracle = false;
  bool quiet = false;
};

double as_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw obsel::ConfigError(what + " must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw obsel::ConfigError(what + " must be an integer");
  return j.get<int>();
}

RunConfig parse_run_config(const json& doc) {
  obsel::require_keys(
      doc, {"seed", "model", "catalog", "selection", "resilient", "estimate", "sweep"},
      "run config");
  if (!doc.contains("model")) throw obsel::ConfigError("run config: missing \"model\"");
  if (!doc.contains("catalog")) throw obsel::ConfigError("run config: missing \"catalog\"");

  RunConfig cfg;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned())
      throw obsel::ConfigError("run config: seed must be a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.model = doc["model"];
  cfg.catalog = doc["catalog"];

  if (doc.contains("selection")) {
    const json& s = doc["selection"];
    obsel::require_keys(s, {"budget", "alpha", "horizon", "rank_tol"}, "selection config");
    if (s.contains("budget")) {
      cfg.selection.budget = as_number(s["budget"], "selection.budget");
      if (!(cfg.selection.budget > 0.0))
        throw obsel::ConfigError("selection.budget must be positive");
      cfg.has_budget = true;
    }
    if (s.contains("alpha")) {
      cfg.selection.alpha = as_number(s["alpha"], "selection.alpha");
      if (cfg.selection.alpha < 0.0)
        throw obsel::ConfigError("selection.alpha must be non-negative");
    }
    if (s.contains("horizon")) {
      cfg.selection.horizon = as_int(s["horizon"], "selection.horizon");
      if (cfg.selection.horizon < 0)
        throw obsel::ConfigError("selection.horizon must be non-negative");
    }
    if (s.contains("rank_tol")) {
      cfg.selection.rank_tol = as_number(s["rank_tol"], "selection.rank_tol");
      if (!(cfg.selection.rank_tol > 0.0))
        throw obsel::ConfigError("selection.rank_tol must be positive");
    }
  }

  if (doc.contains("resilient")) {
    const json& r = doc["resilient"];
    obsel::require_keys(r, {"extra_budget", "max_additions", "failures"},
                        "resilient config");
    if (r.contains("extra_budget")) {
      cfg.resilient.extra_budget = as_number(r["extra_budget"], "resilient.extra_budget");
      if (cfg.resilient.extra_budget < 0.0)
        throw obsel::ConfigError("resilient.extra_budget must be non-negative");
    }
    if (r.contains("max_additions")) {
      cfg.resilient.max_additions = as_int(r["max_additions"], "resilient.max_additions");
      if (cfg.resilient.max_additions < 0)
        throw obsel::ConfigError("resilient.max_additions must be non-negative");
    }
    if (r.contains("failures")) {
      cfg.resilient.failures = as_int(r["failures"], "resilient.failures");
      if (cfg.resilient.failures < 0)
        throw obsel::ConfigError("resilient.failures must be non-negative");
    }
    cfg.has_resilient = true;
  }

  if (doc.contains("estimate")) {
    const json& e = doc["estimate"];
    obsel::require_keys(e, {"horizon", "trials"}, "estimate config");
    if (e.contains("horizon")) {
      cfg.estimate_horizon = as_int(e["horizon"], "estimate.horizon");
      if (cfg.estimate_horizon < 1)
        throw obsel::ConfigError("estimate.horizon must be at least 1");
    }
    if (e.contains("trials")) {
      cfg.estimate_trials = as_int(e["trials"], "estimate.trials");
      if (cfg.estimate_trials < 0)
        throw obsel::ConfigError("estimate.trials must be non-negative");
    }
    cfg.has_estimate = true;
  }

  if (doc.contains("sweep")) {
    const json& w = doc["sweep"];
    obsel::require_keys(w, {"alphas", "sizes"}, "sweep config");
    if (!w.contains("alphas") || !w["alphas"].is_array() || w["alphas"].empty())
      throw obsel::ConfigError("sweep.alphas must be a non-empty array");
    if (!w.contains("sizes") || !w["sizes"].is_array() || w["sizes"].empty())
      throw obsel::ConfigError("sweep.sizes must be a non-empty array");
    for (const json& a : w["alphas"]) {
      double v = as_number(a, "sweep.alphas entry");
      if (v < 0.0) throw obsel::ConfigError("sweep.alphas entries must be non-negative");
      cfg.sweep_alphas.push_back(v);
    }
    for (const json& s : w["sizes"]) {
      int v = as_int(s, "sweep.sizes entry");
      if (v < 1) throw obsel::ConfigError("sweep.sizes entries must be positive");
      cfg.sweep_sizes.push_back(v);
    }
    cfg.has_sweep = true;
  }
  return cfg;
}

RunConfig load_config(const CliOptions& opt) {
  if (opt.config_path.empty()) throw obsel::ConfigError("--config is required");
  RunConfig cfg = parse_run_config(obsel::read_json_file(opt.config_path));
  if (opt.seed_given) cfg.seed = opt.seed;
  return cfg;
}

std::string out_path(const CliOptions& opt, const std::string& name) {
  std::filesystem::create_directories(opt.out_dir);
  return (std::filesystem::path(opt.out_dir) / name).string();
}

std::string id_list(const std::vector<int>& ids) {
  std::string s = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(ids[i]);
  }
  s += "}";
  return s;
}

void print_trace_table(const obsel::SelectionTrace& trace) {
  std::printf("%5s %12s %10s %12s  %s\n", "size", "lambda", "cost", "cpi", "drop");
  for (const obsel::SelectionStep& st : trace.steps) {
    if (st.removed_sensor > 0)
      std::printf("%5d %12.4f %10.2f %12.4f  %d\n", st.set_size, st.lambda, st.cost,
                  st.cpi, st.removed_sensor);
    else
      std::printf("%5d %12.4f %10.2f %12.4f  -\n", st.set_size, st.lambda, st.cost,
                  st.cpi);
  }
}

struct BuiltProblem {
  obsel::SystemModel model;
  obsel::SensorCatalog catalog;
};

BuiltProblem build_problem(const RunConfig& cfg) {
  BuiltProblem p;
  p.model = obsel::model_from_json(cfg.model, cfg.seed);
  p.catalog = obsel::catalog_from_json(cfg.catalog, p.model.n, cfg.seed);
  p.catalog.validate(p.model.n);
  return p;
}

int cmd_select(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_budget)
    throw obsel::ConfigError("select needs selection.budget in the config");
  BuiltProblem p = build_problem(cfg);

  auto [state, trace] = obsel::greedy_remove(p.model, p.catalog, cfg.selection);

  obsel::write_selection_trace_csv(out_path(opt, "selection_trace.csv"), trace);
  obsel::write_selection_result_json(out_path(opt, "selection_result.json"), state,
                                     cfg.selection, trace.status);

  if (!opt.quiet) {
    std::printf("catalog: %d sensors, total cost %.2f; budget %.2f, alpha %g\n",
                p.catalog.size(), p.catalog.total_cost(), cfg.selection.budget,
                cfg.selection.alpha);
    print_trace_table(trace);
    std::printf("candidate evaluations: %ld\n", trace.candidate_evaluations);
    std::printf("selected %zu sensors, cost %.2f, lambda %.4f, cpi %.4f\n",
                state.selected_ids.size(), state.cost, state.lambda, state.cpi);
    std::printf("ids: %s\n", id_list(state.selected_ids).c_str());
    std::printf("status: %s\n", trace.status == obsel::SelectionStatus::BudgetMet
                                    ? "budget met"
                                    : "infeasible");
  }

  if (opt.oracle) {
    if (p.catalog.size() <= 20) {
      obsel::SelectionState best =
          obsel::exhaustive_select(p.model, p.catalog, cfg.selection);
      double gap = best.lambda > 0.0 ? (best.lambda - state.lambda) / best.lambda : 0.0;
      std::printf("oracle: lambda %.6f ids %s; greedy lambda %.6f; relative gap %.3e\n",
                  best.lambda, id_list(best.selected_ids).c_str(), state.lambda, gap);
    } else {
      std::fprintf(stderr,
                   "oracle skipped: catalog size %d exceeds the enumeration cap of 20\n",
                   p.catalog.size());
    }
  }

  return trace.status == obsel::SelectionStatus::BudgetMet ? 0 : 3;
}

int cmd_resilient(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_budget)
    throw obsel::ConfigError("resilient needs selection.budget in the config");
  if (!cfg.has_resilient)
    throw obsel::ConfigError("resilient needs a resilient section in the config");
  BuiltProblem p = build_problem(cfg);

  auto [base, trace] = obsel::greedy_remove(p.model, p.catalog, cfg.selection);
  if (trace.status != obsel::SelectionStatus::BudgetMet)
    throw obsel::InfeasibleError("resilient: the base selection stage ended over budget");

  obsel::ResilientResult result = obsel::greedy_add(
      p.model, p.catalog, base.selected_ids, cfg.selection, cfg.resilient);

  obsel::write_resilient_trace_csv(out_path(opt, "resilient_trace.csv"), result.rounds);
  obsel::write_resilient_result_json(out_path(opt, "resilient_result.json"), result);

  if (!opt.quiet) {
    std::printf("base: %zu sensors, cost %.2f, lambda %.4f, ids %s\n",
                base.selected_ids.size(), base.cost, base.lambda,
                id_list(base.selected_ids).c_str());
    std::printf("tolerated failures: %d; extra budget %.2f; addition rounds: %d\n",
                cfg.resilient.failures, cfg.resilient.extra_budget,
                cfg.resilient.max_additions);
    for (const obsel::ResilientRound& r : result.rounds) {
      long cands = static_cast<long>(r.candidate_worst.size());
      long scen = cands > 0 ? r.evaluations / cands : 0;
      if (r.chosen_id > 0) {
        double worst = 0.0;
        for (const auto& cw : r.candidate_worst)
          if (cw.first == r.chosen_id) worst = cw.second;
        std::printf(
            "round %d: %ld candidates x %ld failure scenarios = %ld evaluations; "
            "added %d (worst-case lambda %.4f)\n",
            r.round, cands, scen, r.evaluations, r.chosen_id, worst);
      } else {
        std::printf(
            "round %d: %ld candidates x %ld failure scenarios = %ld evaluations; "
            "no affordable addition\n",
            r.round, cands, scen, r.evaluations);
      }
    }
    std::printf("added %s, extra cost %.2f, worst-case lambda %.4f\n",
                id_list(result.added_ids).c_str(), result.extra_cost,
                result.worst_lambda);
  }

  if (opt.oracle) {
    if (p.catalog.size() <= 12 && cfg.resilient.max_additions <= 2) {
      obsel::ResilientResult best = obsel::exhaustive_resilient(
          p.model, p.catalog, base.selected_ids, cfg.selection, cfg.resilient);
      std::printf("oracle: additions %s worst-case lambda %.6f; greedy %s %.6f\n",
                  id_list(best.added_ids).c_str(), best.worst_lambda,
                  id_list(result.added_ids).c_str(), result.worst_lambda);
    } else {
      std::fprintf(stderr,
                   "oracle skipped: needs catalog size <= 12 and max_additions <= 2\n");
    }
  }

  return 0;
}

int cmd_sweep_alpha(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_sweep)
    throw obsel::ConfigError("sweep-alpha needs a sweep section in the config");
  BuiltProblem p = build_problem(cfg);

  std::vector<obsel::FrontierPoint> frontier = obsel::alpha_sweep(
      p.model, p.catalog, cfg.selection, cfg.sweep_alphas, cfg.sweep_sizes);
  obsel::write_frontier_csv(out_path(opt, "frontier.csv"), frontier);

  if (!opt.quiet) {
    std::printf("%8s %6s %12s %10s\n", "alpha", "size", "lambda", "cost");
    for (const obsel::FrontierPoint& f : frontier) {
      if (f.feasible)
        std::printf("%8g %6d %12.4f %10.2f\n", f.alpha, f.size, f.lambda, f.cost);
      else
        std::printf("%8g %6d %12s %10s\n", f.alpha, f.size, "-", "-");
    }
    std::printf("%zu frontier rows\n", frontier.size());
  }
  return 0;
}

int cmd_estimate(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_budget)
    throw obsel::ConfigError("estimate needs selection.budget in the config");
  if (!cfg.has_estimate)
    throw obsel::ConfigError("estimate needs an estimate section in the config");
  BuiltProblem p = build_problem(cfg);

  auto [state, trace] = obsel::greedy_remove(p.model, p.catalog, cfg.selection);
  if (trace.status != obsel::SelectionStatus::BudgetMet)
    throw obsel::InfeasibleError("estimate: the selection stage ended over budget");

  // Standalone filter run for the exported trajectories: noisy truth from the
  // operating point, measurements corrupted per sensor, filter tracking both.
  const int K = cfg.estimate_horizon;
  obsel::MatrixXd C = p.catalog.output_matrix(state.selected_ids, p.model.n);
  obsel::EKFConfig ekf = obsel::default_ekf_config(p.model, C);
  obsel::NoiseSpec noise;
  noise.process_std = ekf.Q_w.diagonal().cwiseSqrt();
  noise.measurement_std = ekf.R_v.diagonal().cwiseSqrt();
  std::vector<obsel::VectorXd> inputs(static_cast<std::size_t>(K) + 1, p.model.u_ref);
  obsel::Trajectory truth =
      obsel::simulate(p.model, p.model.x_ref, inputs, K, noise,
                      obsel::substream_seed(cfg.seed, "estimate-truth"));

  std::mt19937_64 meas_engine =
      obsel::substream_engine(cfg.seed, "estimate-measurement-noise");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<obsel::VectorXd> measurements;
  measurements.reserve(truth.states.size());
  for (const obsel::VectorXd& x : truth.states) {
    obsel::VectorXd y = C * x;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y(i) += noise.measurement_std(i) * unit(meas_engine);
    measurements.push_back(std::move(y));
  }

  obsel::EstimateRun run = obsel::ekf_run(p.model, C, measurements, inputs, ekf);
  obsel::write_estimate_csv(out_path(opt, "estimate_selected.csv"), truth, run.estimates);

  obsel::ComparisonReport report =
      obsel::compare_selections(p.model, p.catalog, state, cfg.estimate_trials,
                                cfg.estimate_horizon, cfg.seed, cfg.selection);
  obsel::write_comparison_report_json(out_path(opt, "comparison.json"), report);

  if (!opt.quiet) {
    std::printf("selected: %zu sensors, cost %.2f, lambda %.4f, ids %s\n",
                state.selected_ids.size(), state.cost, state.lambda,
                id_list(state.selected_ids).c_str());
    std::printf("filter horizon: %d samples%s\n", K,
                run.regularized ? " (innovation covariance regularized)" : "");
    std::printf("%-10s %10s %12s %12s\n", "case", "cost", "lambda", "rmse");
    std::printf("%-10s %10.2f %12.4f %12.6f\n", "selected", report.selected.cost,
                report.selected.lambda, report.selected.rmse_total);
    for (std::size_t i = 0; i < report.alternatives.size(); ++i) {
      const obsel::ComparisonCase& c = report.alternatives[i];
      std::printf("random-%-3zu %10.2f %12.4f %12.6f\n", i + 1, c.cost, c.lambda,
                  c.rmse_total);
    }
    std::printf("cases: %zu of %d requested alternatives ran\n",
                report.alternatives.size(), report.requested_trials);
    std::printf("selected rank: %d of %zu; median alternative rmse %.6f\n",
                report.selected_rank, report.alternatives.size() + 1,
                report.median_alternative_rmse);
  }
  return 0;
}

int cmd_oracle_check(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_budget)
    throw obsel::ConfigError("oracle-check needs selection.budget in the config");
  BuiltProblem p = build_problem(cfg);
  if (p.catalog.size() > 20)
    throw obsel::ConfigError("oracle-check: catalog size " +
                             std::to_string(p.catalog.size()) +
                             " exceeds the enumeration cap of 20");

  bool greedy_ok = false;
  obsel::SelectionState greedy_state;
  obsel::SelectionTrace greedy_trace;
  try {
    auto [st, tr] = obsel::greedy_remove(p.model, p.catalog, cfg.selection);
    greedy_state = st;
    greedy_trace = tr;
    greedy_ok = tr.status == obsel::SelectionStatus::BudgetMet;
  } catch (const obsel::InfeasibleError&) {
    greedy_ok = false;
  }

  bool oracle_ok = false;
  obsel::SelectionState oracle_state;
  try {
    oracle_state = obsel::exhaustive_select(p.model, p.catalog, cfg.selection);
    oracle_ok = true;
  } catch (const obsel::InfeasibleError&) {
    oracle_ok = false;
  }

  json doc;
  doc["greedy"]["feasible"] = greedy_ok;
  doc["oracle"]["feasible"] = oracle_ok;
  if (greedy_ok) {
    doc["greedy"]["ids"] = greedy_state.selected_ids;
    doc["greedy"]["lambda"] = greedy_state.lambda;
    doc["greedy"]["cost"] = greedy_state.cost;
  }
  if (oracle_ok) {
    doc["oracle"]["ids"] = oracle_state.selected_ids;
    doc["oracle"]["lambda"] = oracle_state.lambda;
    doc["oracle"]["cost"] = oracle_state.cost;
  }
  if (greedy_ok && oracle_ok) {
    doc["lambda_gap"] = oracle_state.lambda - greedy_state.lambda;
    doc["relative_gap"] = oracle_state.lambda > 0.0
                              ? (oracle_state.lambda - greedy_state.lambda) /
                                    oracle_state.lambda
                              : 0.0;
  }
  obsel::write_json_file(out_path(opt, "oracle_check.json"), doc);

  if (!opt.quiet) {
    if (greedy_ok)
      std::printf("greedy: lambda %.6f cost %.2f ids %s\n", greedy_state.lambda,
                  greedy_state.cost, id_list(greedy_state.selected_ids).c_str());
    else
      std::printf("greedy: no feasible selection within budget\n");
    if (oracle_ok)
      std::printf("oracle: lambda %.6f cost %.2f ids %s\n", oracle_state.lambda,
                  oracle_state.cost, id_list(oracle_state.selected_ids).c_str());
    else
      std::printf("oracle: no observable subset within budget\n");
    if (greedy_ok && oracle_ok)
      std::printf("lambda gap: %.6e (relative %.6e)\n",
                  oracle_state.lambda - greedy_state.lambda,
                  doc["relative_gap"].get<double>());
  }

  if (!oracle_ok && !greedy_ok) return 3;
  if (oracle_ok && !greedy_ok) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained, failure-resilient sensor selection"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "run configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory (default: out)");
    sub->add_option("--seed", opt.seed, "override the config seed")
        ->each([&opt](const std::string&) { opt.seed_given = true; });
    sub->add_flag("--oracle", opt.oracle, "cross-check against exhaustive enumeration");
    sub->add_flag("--quiet", opt.quiet, "suppress the summary printout");
  };

  CLI::App* select = app.add_subcommand(
      "select", "greedy sensor removal under a budget");
  CLI::App* resilient = app.add_subcommand(
      "resilient", "strengthen a selection against sensor failures");
  CLI::App* sweep = app.add_subcommand(
      "sweep-alpha", "score/cost frontier over alpha and set size");
  CLI::App* estimate = app.add_subcommand(
      "estimate", "filter-based validation of the selected set");
  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "greedy versus exhaustive enumeration gap");
  for (CLI::App* sub : {select, resilient, sweep, estimate, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (select->parsed()) return cmd_select(opt);
    if (resilient->parsed()) return cmd_resilient(opt);
    if (sweep->parsed()) return cmd_sweep_alpha(opt);
    if (estimate->parsed()) return cmd_estimate(opt);
    if (oracle->parsed()) return cmd_oracle_check(opt);
  } catch (const obsel::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const obsel::InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 3;
  } catch (const obsel::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 2;
}
