// Micro benchmarks for the numerical hot paths: column orthogonalization at
// the full-catalog surrogate size, Jacobian chain propagation, subset scoring
// from a cached sensitivity, and worst-case scoring under single failures.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "obsel/io.hpp"
#include "obsel/model.hpp"
#include "obsel/observability.hpp"
#include "obsel/resilient.hpp"
#include "obsel/selection.hpp"
#include "obsel/sensitivity.hpp"
#include "obsel/surrogate.hpp"

namespace {

obsel::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  obsel::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = g(eng);
  return M;
}

struct LinearProblem {
  obsel::SystemModel model;
  obsel::SensorCatalog catalog;
  obsel::SelectionConfig config;
};

LinearProblem linear_problem() {
  LinearProblem p;
  obsel::RandomLinearSpec spec;
  spec.n = 30;
  spec.off_diag_fraction = 0.1;
  p.model = obsel::generate_random_linear(spec, 12345);
  nlohmann::json doc = {{"identity",
                         {{"cost_mean", 10.0}, {"cost_std", 2.0},
                          {"cost_min", 6.0}, {"cost_max", 13.8}}}};
  p.catalog = obsel::catalog_from_json(doc, 30, 12345);
  p.config.budget = 1e9;
  p.config.alpha = 1.0;
  p.config.horizon = 8;
  return p;
}

void BM_Orthogonalization713x103(benchmark::State& state) {
  // Full surrogate catalog over a 30-sample window: (30+1)*23 rows, 103 cols.
  const obsel::MatrixXd S = gaussian(713, 103, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(obsel::successive_orthogonalization(S, 1e-10));
}
BENCHMARK(BM_Orthogonalization713x103)->Unit(benchmark::kMillisecond);

void BM_TransitionChainLinear30(benchmark::State& state) {
  LinearProblem p = linear_problem();
  for (auto _ : state) {
    obsel::Trajectory traj = obsel::simulate_nominal(p.model, 30);
    benchmark::DoNotOptimize(obsel::propagate_chain(p.model, traj));
  }
}
BENCHMARK(BM_TransitionChainLinear30)->Unit(benchmark::kMicrosecond);

void BM_SurrogateStep(benchmark::State& state) {
  obsel::SystemModel m = obsel::surrogate_ccp();
  const obsel::VectorXd a = m.eval_algebraic(m.x_ref, m.u_ref);
  for (auto _ : state) benchmark::DoNotOptimize(m.step(m.x_ref, a, m.u_ref));
}
BENCHMARK(BM_SurrogateStep)->Unit(benchmark::kMicrosecond);

void BM_SurrogateJacobian(benchmark::State& state) {
  obsel::SystemModel m = obsel::surrogate_ccp();
  const obsel::VectorXd a = m.eval_algebraic(m.x_ref, m.u_ref);
  for (auto _ : state)
    benchmark::DoNotOptimize(m.jac_state(m.x_ref, a, m.u_ref));
}
BENCHMARK(BM_SurrogateJacobian)->Unit(benchmark::kMillisecond);

void BM_CachedSubsetScore(benchmark::State& state) {
  LinearProblem p = linear_problem();
  obsel::SubsetEvaluator evaluator(p.model, p.catalog, p.config);
  std::vector<int> ids;
  for (int id = 1; id <= 30; id += 2) ids.push_back(id);
  for (auto _ : state) benchmark::DoNotOptimize(evaluator.evaluate(ids));
}
BENCHMARK(BM_CachedSubsetScore)->Unit(benchmark::kMicrosecond);

void BM_GreedyRemovalStep(benchmark::State& state) {
  // One full greedy scan: score all 30 single removals of the full catalog.
  LinearProblem p = linear_problem();
  obsel::SubsetEvaluator evaluator(p.model, p.catalog, p.config);
  std::vector<int> all;
  for (int id = 1; id <= 30; ++id) all.push_back(id);
  for (auto _ : state) {
    double best = -1.0;
    for (int drop : all) {
      std::vector<int> rest;
      for (int id : all)
        if (id != drop) rest.push_back(id);
      obsel::SelectionState s = evaluator.evaluate(rest);
      if (s.cpi > best) best = s.cpi;
    }
    benchmark::DoNotOptimize(best);
  }
}
BENCHMARK(BM_GreedyRemovalStep)->Unit(benchmark::kMillisecond);

void BM_WorstCaseSingleFailures(benchmark::State& state) {
  LinearProblem p = linear_problem();
  obsel::SubsetEvaluator evaluator(p.model, p.catalog, p.config);
  std::vector<int> ids;
  for (int id = 1; id <= 15; ++id) ids.push_back(id);
  obsel::SensorMultiset sel = obsel::SensorMultiset::from_ids(ids, 30);
  for (auto _ : state)
    benchmark::DoNotOptimize(obsel::worst_case_lambda(evaluator, sel, 1));
}
BENCHMARK(BM_WorstCaseSingleFailures)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
