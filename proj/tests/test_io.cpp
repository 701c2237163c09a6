#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "obsel/errors.hpp"
#include "obsel/io.hpp"
#include "obsel/model.hpp"
#include "support/oracles.hpp"

using namespace obsel;
using nlohmann::json;

namespace {

std::string tmp_path(const std::string& name) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "obsel_io_tests";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("format_double round-trips through strtod exactly") {
  const std::vector<double> values = {0.0,    1.0,     -1.0,   0.1,     0.1 + 0.2,
                                      8.59,   1828.94, 1e-300, 1e300,   -2.5,
                                      M_PI,   1.0 / 3.0, 213.0, 5e-324, -0.0};
  for (double v : values) {
    const std::string s = format_double(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
    CHECK(format_double(v) == s);
  }
}

TEST_CASE("format_double uses the shortest decimal form") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(8.59) == "8.59");
}

TEST_CASE("require_keys accepts listed keys and rejects strangers") {
  json ok = {{"a", 1}, {"b", 2}};
  CHECK_NOTHROW(require_keys(ok, {"a", "b", "c"}, "ctx"));
  json bad = {{"a", 1}, {"typo", 2}};
  try {
    require_keys(bad, {"a"}, "myctx");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "typo"));
    CHECK(contains(e.what(), "myctx"));
  }
  json arr = json::array({1, 2});
  CHECK_THROWS_AS(require_keys(arr, {"a"}, "ctx"), ConfigError);
}

TEST_CASE("model_from_json builds a linear model from an explicit matrix") {
  json doc = {{"kind", "linear"}, {"matrix", {{0.5, 0.1}, {0.0, 0.9}}}};
  SystemModel m = model_from_json(doc, 1);
  CHECK(m.n == 2);
  VectorXd x(2);
  x << 1.0, 2.0;
  VectorXd next = m.step(x, VectorXd(), VectorXd());
  CHECK(next(0) == doctest::Approx(0.7));
  CHECK(next(1) == doctest::Approx(1.8));
  CHECK(m.x_ref.isApprox(VectorXd::Ones(2)));

  doc["n"] = 2;
  CHECK_NOTHROW(model_from_json(doc, 1));
  doc["n"] = 3;
  CHECK_THROWS_AS(model_from_json(doc, 1), ConfigError);
}

TEST_CASE("model_from_json rejects malformed linear documents") {
  CHECK_THROWS_AS(model_from_json(json{{"kind", "linear"}}, 1), ConfigError);
  CHECK_THROWS_AS(model_from_json(json{{"matrix", {{1.0}}}}, 1), ConfigError);
  CHECK_THROWS_AS(model_from_json(json{{"kind", "nope"}, {"matrix", {{1.0}}}}, 1),
                  ConfigError);
  // Non-square, ragged, and non-numeric matrices.
  CHECK_THROWS_AS(model_from_json(json{{"kind", "linear"}, {"matrix", {{1.0, 2.0}}}}, 1),
                  ConfigError);
  json ragged = {{"kind", "linear"}, {"matrix", {{1.0, 2.0}, {3.0}}}};
  CHECK_THROWS_AS(model_from_json(ragged, 1), ConfigError);
  json text = {{"kind", "linear"}, {"matrix", {{"a"}}}};
  CHECK_THROWS_AS(model_from_json(text, 1), ConfigError);
  // Matrix and generator are mutually exclusive; unknown fields are rejected.
  json both = {{"kind", "linear"},
               {"matrix", {{1.0}}},
               {"generator", {{"off_diag_fraction", 0.1}}},
               {"n", 1}};
  CHECK_THROWS_AS(model_from_json(both, 1), ConfigError);
  json stray = {{"kind", "linear"}, {"matrix", {{1.0}}}, {"bogus", 1}};
  CHECK_THROWS_AS(model_from_json(stray, 1), ConfigError);
}

TEST_CASE("model_from_json generator path is seed-deterministic") {
  json doc = {{"kind", "linear"},
              {"n", 6},
              {"generator", {{"off_diag_fraction", 0.2}}}};
  SystemModel a = model_from_json(doc, 42);
  SystemModel b = model_from_json(doc, 42);
  SystemModel c = model_from_json(doc, 43);
  VectorXd x = VectorXd::Ones(6);
  const VectorXd none;
  CHECK(a.jac_state(x, none, none) == b.jac_state(x, none, none));
  CHECK(a.jac_state(x, none, none) != c.jac_state(x, none, none));
  CHECK(a.n == 6);

  json no_n = {{"kind", "linear"}, {"generator", {{"off_diag_fraction", 0.2}}}};
  CHECK_THROWS_AS(model_from_json(no_n, 42), ConfigError);
  json stray = {{"kind", "linear"},
                {"n", 4},
                {"generator", {{"off_diag_fraction", 0.2}, {"zzz", 1}}}};
  CHECK_THROWS_AS(model_from_json(stray, 42), ConfigError);
}

TEST_CASE("model_from_json honors interval and label overrides") {
  json doc = {{"kind", "custom"},
              {"matrix", {{0.5, 0.0}, {0.0, 0.5}}},
              {"sample_interval_minutes", 2.5},
              {"labels", {"alpha", "beta"}}};
  SystemModel m = model_from_json(doc, 1);
  CHECK(m.sample_interval_minutes == 2.5);
  REQUIRE(m.labels.size() == 2);
  CHECK(m.labels[0] == "alpha");

  doc["labels"] = {"only-one"};
  CHECK_THROWS_AS(model_from_json(doc, 1), ConfigError);
}

TEST_CASE("model_from_json builds the plant surrogate") {
  json doc = {{"kind", "surrogate_ccp"}};
  SystemModel m = model_from_json(doc, 1);
  CHECK(m.n == 103);
  json stray = {{"kind", "surrogate_ccp"}, {"params", {{"bogus_knob", 1.0}}}};
  CHECK_THROWS_AS(model_from_json(stray, 1), ConfigError);
}

TEST_CASE("catalog_from_json identity form draws clipped seeded costs") {
  json doc = {{"identity",
               {{"cost_mean", 10.0}, {"cost_std", 2.0}, {"cost_min", 6.0},
                {"cost_max", 13.8}}}};
  SensorCatalog cat = catalog_from_json(doc, 6, 99);
  REQUIRE(cat.size() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(cat.sensors[static_cast<std::size_t>(i)].id == i + 1);
    CHECK(cat.sensors[static_cast<std::size_t>(i)].state_index == i + 1);
    CHECK(cat.sensors[static_cast<std::size_t>(i)].label ==
          "x" + std::to_string(i + 1));
    CHECK(cat.sensors[static_cast<std::size_t>(i)].cost >= 6.0);
    CHECK(cat.sensors[static_cast<std::size_t>(i)].cost <= 13.8);
  }
  SensorCatalog again = catalog_from_json(doc, 6, 99);
  SensorCatalog other = catalog_from_json(doc, 6, 100);
  bool same = true, differs = false;
  for (int i = 0; i < 6; ++i) {
    same = same && cat.sensors[static_cast<std::size_t>(i)].cost ==
                       again.sensors[static_cast<std::size_t>(i)].cost;
    differs = differs || cat.sensors[static_cast<std::size_t>(i)].cost !=
                             other.sensors[static_cast<std::size_t>(i)].cost;
  }
  CHECK(same);
  CHECK(differs);

  json degenerate = {{"identity",
                      {{"cost_mean", 10.0}, {"cost_std", 0.0}, {"cost_min", 6.0},
                       {"cost_max", 13.8}}}};
  SensorCatalog flat = catalog_from_json(degenerate, 3, 1);
  for (const Sensor& s : flat.sensors) CHECK(s.cost == 10.0);
}

TEST_CASE("catalog_from_json rejects bad generated-cost parameters") {
  json inverted = {{"identity",
                    {{"cost_mean", 10.0}, {"cost_std", 1.0}, {"cost_min", 9.0},
                     {"cost_max", 6.0}}}};
  CHECK_THROWS_AS(catalog_from_json(inverted, 3, 1), ConfigError);
  json free_sensors = {{"identity",
                        {{"cost_mean", 10.0}, {"cost_std", 1.0}, {"cost_min", 0.0},
                         {"cost_max", 6.0}}}};
  CHECK_THROWS_AS(catalog_from_json(free_sensors, 3, 1), ConfigError);
  json stray = {{"identity",
                 {{"cost_mean", 10.0}, {"cost_std", 1.0}, {"cost_min", 1.0},
                  {"cost_max", 6.0}, {"zzz", 0}}}};
  CHECK_THROWS_AS(catalog_from_json(stray, 3, 1), ConfigError);
}

TEST_CASE("catalog_from_json explicit form supports state and row sensors") {
  json doc = {{"sensors",
               {{{"id", 1}, {"label", "top"}, {"state", 2}, {"cost", 5.0}},
                {{"id", 2}, {"row", {0.5, 0.5, 0.0}}, {"cost", 1.0}}}}};
  SensorCatalog cat = catalog_from_json(doc, 3, 1);
  REQUIRE(cat.size() == 2);
  CHECK(cat.sensors[0].state_index == 2);
  CHECK(cat.sensors[0].label == "top");
  CHECK(cat.sensors[1].row.size() == 3);
  CHECK(cat.sensors[1].row(0) == 0.5);
  CHECK(cat.total_cost() == doctest::Approx(6.0));
}

TEST_CASE("catalog_from_json rejects malformed sensor entries") {
  json both = {{"sensors",
                {{{"id", 1}, {"state", 1}, {"row", {1.0}}, {"cost", 1.0}}}}};
  CHECK_THROWS_AS(catalog_from_json(both, 1, 1), ConfigError);
  json neither = {{"sensors", {{{"id", 1}, {"cost", 1.0}}}}};
  CHECK_THROWS_AS(catalog_from_json(neither, 1, 1), ConfigError);
  json no_cost = {{"sensors", {{{"id", 1}, {"state", 1}}}}};
  CHECK_THROWS_AS(catalog_from_json(no_cost, 1, 1), ConfigError);
  json dup = {{"sensors",
               {{{"id", 1}, {"state", 1}, {"cost", 1.0}},
                {{"id", 1}, {"state", 2}, {"cost", 1.0}}}}};
  CHECK_THROWS_AS(catalog_from_json(dup, 2, 1), ConfigError);
  json out_of_range = {{"sensors", {{{"id", 1}, {"state", 9}, {"cost", 1.0}}}}};
  CHECK_THROWS_AS(catalog_from_json(out_of_range, 2, 1), ConfigError);
  json stray = {{"sensors", {{{"id", 1}, {"state", 1}, {"cost", 1.0}, {"z", 1}}}}};
  CHECK_THROWS_AS(catalog_from_json(stray, 1, 1), ConfigError);
  CHECK_THROWS_AS(catalog_from_json(json{{"bogus", 1}}, 1, 1), ConfigError);
}

TEST_CASE("write_trajectory_csv emits one labelled row per step") {
  Trajectory traj;
  VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 3.0, 4.5;
  traj.states = {a, b};
  const std::string path = tmp_path("traj.csv");
  write_trajectory_csv(path, traj, 3.0);
  const std::string text = testsup::read_file(path);
  CHECK(contains(text, "step,t_minutes,x_1,x_2\n"));
  CHECK(contains(text, "0,0,1,2\n"));
  CHECK(contains(text, "1,3,3,4.5\n"));

  Trajectory empty;
  CHECK_THROWS_AS(write_trajectory_csv(tmp_path("traj2.csv"), empty, 1.0), ConfigError);
  CHECK_THROWS_AS(write_trajectory_csv("/nonexistent-dir/x.csv", traj, 1.0), ConfigError);
}

TEST_CASE("write_selection_trace_csv quotes removed sets and blanks step zero") {
  SelectionTrace trace;
  SelectionStep s0;
  s0.set_size = 4;
  s0.removed_set = {};
  s0.lambda = 2.0;
  s0.cost = 10.0;
  s0.cpi = 0.2;
  s0.removed_sensor = 0;
  SelectionStep s1;
  s1.set_size = 2;
  s1.removed_set = {14, 12};
  s1.lambda = 1.5;
  s1.cost = 6.0;
  s1.cpi = 0.25;
  s1.removed_sensor = 12;
  trace.steps = {s0, s1};
  const std::string path = tmp_path("trace.csv");
  write_selection_trace_csv(path, trace);
  const std::string text = testsup::read_file(path);
  CHECK(contains(text, "m,removed_set,lambda,c_actual,cpi,removed_sensor\n"));
  CHECK(contains(text, "4,\"{}\",2,10,0.2,\n"));
  CHECK(contains(text, "2,\"{14,12}\",1.5,6,0.25,12\n"));
}

TEST_CASE("write_frontier_csv zeroes infeasible points") {
  FrontierPoint feasible;
  feasible.alpha = 0.5;
  feasible.size = 4;
  feasible.lambda = 3.25;
  feasible.cost = 12.0;
  feasible.feasible = true;
  FrontierPoint infeasible;
  infeasible.alpha = 0.5;
  infeasible.size = 3;
  infeasible.lambda = 99.0;
  infeasible.cost = 99.0;
  infeasible.feasible = false;
  const std::string path = tmp_path("frontier.csv");
  write_frontier_csv(path, {feasible, infeasible});
  const std::string text = testsup::read_file(path);
  CHECK(contains(text, "alpha,size,lambda,cost\n"));
  CHECK(contains(text, "0.5,4,3.25,12\n"));
  CHECK(contains(text, "0.5,3,0,0\n"));
}

TEST_CASE("write_sensitivity_csv labels rows by sensor and sample") {
  StackedSensitivity S;
  S.S = MatrixXd::Zero(2, 2);
  S.S << 1.0, 0.0, 0.5, 0.25;
  S.row_sensor = {7, 7};
  S.row_time = {0, 1};
  const std::string path = tmp_path("sens.csv");
  write_sensitivity_csv(path, S);
  const std::string text = testsup::read_file(path);
  CHECK(contains(text, "sensor_id,k,s_1,s_2\n"));
  CHECK(contains(text, "7,0,1,0\n"));
  CHECK(contains(text, "7,1,0.5,0.25\n"));
}

TEST_CASE("write_resilient_trace_csv marks the chosen candidate") {
  ResilientRound round;
  round.round = 1;
  round.chosen_id = 5;
  round.candidate_worst = {{3, 0.5}, {5, 1.25}};
  const std::string path = tmp_path("resilient.csv");
  write_resilient_trace_csv(path, {round});
  const std::string text = testsup::read_file(path);
  CHECK(contains(text, "round,candidate_id,worst_lambda,chosen\n"));
  CHECK(contains(text, "1,3,0.5,0\n"));
  CHECK(contains(text, "1,5,1.25,1\n"));
}

TEST_CASE("write_estimate_csv pairs truth and estimate columns") {
  Trajectory truth;
  VectorXd x(1);
  x << 2.0;
  truth.states = {x, x};
  std::vector<VectorXd> est = {VectorXd::Ones(1), VectorXd::Ones(1)};
  const std::string path = tmp_path("estimate.csv");
  write_estimate_csv(path, truth, est);
  const std::string text = testsup::read_file(path);
  CHECK(contains(text, "step,x_true_1,x_hat_1\n"));
  CHECK(contains(text, "0,2,1\n"));
  est.pop_back();
  CHECK_THROWS_AS(write_estimate_csv(tmp_path("estimate2.csv"), truth, est), ConfigError);
}

TEST_CASE("selection results survive a JSON file round trip") {
  SelectionState state;
  state.selected_ids = {2, 5, 9};
  state.cost = 27.125;
  state.lambda = 3.14159265358979;
  state.cpi = state.lambda / state.cost;
  state.observable = true;
  SelectionConfig config;
  config.budget = 30.0;
  config.alpha = 1.0;
  const std::string path = tmp_path("result.json");
  write_selection_result_json(path, state, config, SelectionStatus::BudgetMet);
  json doc = read_json_file(path);
  CHECK(doc.at("status") == "budget_met");
  CHECK(doc.at("alpha") == 1.0);
  CHECK(doc.at("budget") == 30.0);
  SelectionState back = selection_result_from_json(doc);
  CHECK(back.selected_ids == state.selected_ids);
  CHECK(back.cost == doctest::Approx(state.cost).epsilon(1e-9));
  CHECK(back.lambda == doctest::Approx(state.lambda).epsilon(1e-9));
  CHECK(back.cpi == doctest::Approx(state.cpi).epsilon(1e-9));
  CHECK(back.observable);

  json stray = doc;
  stray["extra"] = 1;
  CHECK_THROWS_AS(selection_result_from_json(stray), ConfigError);
}

TEST_CASE("infeasible selection results are labelled as such") {
  SelectionState state;
  state.selected_ids = {1};
  state.cost = 4.0;
  state.lambda = 0.0;
  state.cpi = 0.0;
  SelectionConfig config;
  config.budget = 1.0;
  json doc = selection_result_to_json(state, config, SelectionStatus::Infeasible);
  CHECK(doc.at("status") == "infeasible");
  SelectionState back = selection_result_from_json(doc);
  CHECK_FALSE(back.observable);
}

TEST_CASE("resilient and comparison reports serialize their fields") {
  ResilientResult rr;
  rr.base_ids = {1, 2};
  rr.added_ids = {2, 7};
  rr.extra_cost = 12.5;
  rr.worst_lambda = 0.75;
  rr.failures = 1;
  json rj = resilient_result_to_json(rr);
  CHECK(rj.at("base_ids") == json::array({1, 2}));
  CHECK(rj.at("added_ids") == json::array({2, 7}));
  CHECK(rj.at("extra_cost") == 12.5);
  CHECK(rj.at("worst_lambda") == 0.75);
  CHECK(rj.at("R") == 1);

  ComparisonReport report;
  report.selected.ids = {1};
  report.selected.cost = 2.0;
  report.selected.lambda = 1.0;
  report.selected.rmse_total = 0.125;
  ComparisonCase alt;
  alt.ids = {2};
  alt.cost = 2.0;
  alt.lambda = 0.5;
  alt.rmse_total = 0.5;
  report.alternatives = {alt, alt};
  report.selected_rank = 1;
  report.median_alternative_rmse = 0.5;
  report.requested_trials = 2;
  json cj = comparison_report_to_json(report);
  CHECK(cj.at("selected").at("rmse_total") == 0.125);
  CHECK(cj.at("alternatives").size() == 2);
  CHECK(cj.at("selected_rank") == 1);
  CHECK(cj.at("requested_trials") == 2);
}

TEST_CASE("write_json_file ends with a newline and read_json_file wraps errors") {
  const std::string path = tmp_path("doc.json");
  write_json_file(path, json{{"b", 1}, {"a", 2}});
  const std::string text = testsup::read_file(path);
  REQUIRE_FALSE(text.empty());
  CHECK(text.back() == '\n');
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(read_json_file(path) == json{{"a", 2}, {"b", 1}});

  CHECK_THROWS_AS(read_json_file(tmp_path("missing.json")), ConfigError);
  const std::string broken = tmp_path("broken.json");
  std::ofstream(broken) << "{not json";
  try {
    read_json_file(broken);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "invalid JSON"));
  }
}
