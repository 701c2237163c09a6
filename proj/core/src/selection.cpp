#include "obsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "obsel/errors.hpp"
#include "obsel/parallel.hpp"

namespace obsel {

double SensorCatalog::total_cost() const {
  double g = 0.0;
  for (const Sensor& s : sensors) g += s.cost;
  return g;
}

const Sensor& SensorCatalog::by_id(int id) const {
  if (id < 1 || id > size())
    throw ConfigError("sensor id " + std::to_string(id) + " outside catalog");
  const Sensor& s = sensors[static_cast<std::size_t>(id - 1)];
  if (s.id != id) throw ConfigError("catalog ids are not contiguous");
  return s;
}

MatrixXd SensorCatalog::output_matrix(const std::vector<int>& ids, int n) const {
  if (ids.empty()) throw ConfigError("output_matrix: empty sensor selection");
  MatrixXd C = MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()), n);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const Sensor& s = by_id(ids[r]);
    if (s.state_index > 0) {
      if (s.state_index > n)
        throw ConfigError("sensor " + std::to_string(s.id) + " reads state " +
                          std::to_string(s.state_index) + " beyond dimension " +
                          std::to_string(n));
      C(static_cast<Eigen::Index>(r), s.state_index - 1) = 1.0;
    } else {
      if (s.row.size() != n)
        throw ConfigError("sensor " + std::to_string(s.id) + " has a row of length " +
                          std::to_string(s.row.size()) + ", expected " + std::to_string(n));
      C.row(static_cast<Eigen::Index>(r)) = s.row.transpose();
    }
  }
  return C;
}

void SensorCatalog::validate(int n) const {
  if (sensors.empty()) throw ConfigError("catalog is empty");
  for (int i = 0; i < size(); ++i) {
    const Sensor& s = sensors[static_cast<std::size_t>(i)];
    if (s.id != i + 1)
      throw ConfigError("catalog ids must be contiguous from 1; position " +
                        std::to_string(i) + " has id " + std::to_string(s.id));
    if (!(s.cost > 0.0))
      throw ConfigError("sensor " + std::to_string(s.id) + " must have positive cost");
    if (s.state_index == 0 && s.row.size() != n)
      throw ConfigError("sensor " + std::to_string(s.id) + " defines neither a state index nor a row of length " +
                        std::to_string(n));
    if (s.state_index < 0 || s.state_index > n)
      throw ConfigError("sensor " + std::to_string(s.id) + " state index out of range");
  }
}

double cpi(double lambda, double cost, double alpha) {
  if (alpha < 0.0) throw ConfigError("cpi: alpha must be non-negative");
  if (lambda <= 0.0) return 0.0;
  if (alpha == 0.0) return lambda;
  if (cost == 0.0)
    throw NumericalError("cpi: zero cost with positive alpha has no finite value");
  if (cost < 0.0) throw ConfigError("cpi: negative cost");
  return lambda / std::pow(cost, alpha);
}

namespace {

int effective_horizon(const SystemModel& model, const SelectionConfig& config) {
  if (config.horizon < 0) throw ConfigError("selection: negative horizon");
  return config.horizon == 0 ? model.n : config.horizon;
}

double multiset_cost(const SensorCatalog& catalog, const std::vector<int>& ids) {
  double c = 0.0;
  for (int id : ids) c += catalog.by_id(id).cost;
  return c;
}

}  // namespace

SelectionState evaluate_subset(const SystemModel& model, const SensorCatalog& catalog,
                               const std::vector<int>& ids, const SelectionConfig& config) {
  if (ids.empty()) throw ConfigError("evaluate_subset: empty selection");
  catalog.validate(model.n);
  const int K = effective_horizon(model, config);
  Trajectory traj = simulate_nominal(model, K);
  TransitionChain chain = propagate_chain(model, traj);
  MatrixXd C = catalog.output_matrix(ids, model.n);
  StackedSensitivity S = build_sensitivity(C, chain, ids);
  ObservabilityResult obs = successive_orthogonalization(S.S, config.rank_tol);

  SelectionState st;
  st.selected_ids = ids;
  st.cost = multiset_cost(catalog, ids);
  st.lambda = obs.lambda;
  st.observable = obs.observable;
  st.cpi = cpi(st.lambda, st.cost, config.alpha);
  return st;
}

SubsetEvaluator::SubsetEvaluator(const SystemModel& model, const SensorCatalog& catalog,
                                 const SelectionConfig& config)
    : catalog_(&catalog), config_(config), n_(model.n) {
  catalog.validate(model.n);
  const int K = effective_horizon(model, config);
  Trajectory traj = simulate_nominal(model, K);
  TransitionChain chain = propagate_chain(model, traj);
  std::vector<int> all_ids(static_cast<std::size_t>(catalog.size()));
  for (int i = 0; i < catalog.size(); ++i) all_ids[static_cast<std::size_t>(i)] = i + 1;
  MatrixXd C = catalog.output_matrix(all_ids, model.n);
  full_S_ = build_sensitivity(C, chain, all_ids).S;
  m_full_ = catalog.size();
  blocks_ = K + 1;
}

SelectionState SubsetEvaluator::evaluate(const std::vector<int>& ids) const {
  for (std::size_t i = 1; i < ids.size(); ++i)
    if (ids[i] <= ids[i - 1])
      throw ConfigError("SubsetEvaluator: ids must be strictly ascending");
  return evaluate_multiset(ids);
}

SelectionState SubsetEvaluator::evaluate_multiset(const std::vector<int>& ids) const {
  if (ids.empty()) throw ConfigError("SubsetEvaluator: empty selection");
  const int m = static_cast<int>(ids.size());
  MatrixXd S(static_cast<Eigen::Index>(blocks_) * m, n_);
  for (int k = 0; k < blocks_; ++k)
    for (int r = 0; r < m; ++r) {
      int id = ids[static_cast<std::size_t>(r)];
      catalog_->by_id(id);
      S.row(static_cast<Eigen::Index>(k) * m + r) =
          full_S_.row(static_cast<Eigen::Index>(k) * m_full_ + id - 1);
    }
  ObservabilityResult obs = successive_orthogonalization(S, config_.rank_tol);

  SelectionState st;
  st.selected_ids = ids;
  st.cost = multiset_cost(*catalog_, ids);
  st.lambda = obs.lambda;
  st.observable = obs.observable;
  st.cpi = cpi(st.lambda, st.cost, config_.alpha);
  return st;
}

namespace {

/// Shared greedy loop. `stop` is checked on the current set; `on_visit` sees
/// every set the search stands on, in order.
std::pair<SelectionState, SelectionTrace> greedy_core(
    const SubsetEvaluator& ev,
    const std::function<bool(int size, double cost)>& stop,
    const std::function<void(const SelectionState&)>& on_visit) {
  const SensorCatalog& catalog = ev.catalog();
  const int m = catalog.size();

  std::vector<int> current(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) current[static_cast<std::size_t>(i)] = i + 1;

  SelectionState state = ev.evaluate(current);
  if (!state.observable)
    throw InfeasibleError("greedy removal: the full catalog is not observable");

  SelectionTrace trace;
  std::vector<int> removed;

  auto record = [&](int removed_sensor) {
    SelectionStep step;
    step.set_size = static_cast<int>(current.size());
    step.removed_set = removed;
    step.lambda = state.lambda;
    step.cost = state.cost;
    step.cpi = state.cpi;
    step.removed_sensor = removed_sensor;
    trace.steps.push_back(std::move(step));
  };

  if (on_visit) on_visit(state);

  while (!stop(static_cast<int>(current.size()), state.cost) && current.size() > 1) {
    const int count = static_cast<int>(current.size());
    std::vector<SelectionState> cands = parallel_map<SelectionState>(count, [&](int i) {
      std::vector<int> ids = current;
      ids.erase(ids.begin() + i);
      return ev.evaluate(ids);
    });
    trace.candidate_evaluations += count;

    int best = -1;
    for (int i = 0; i < count; ++i) {
      const double c = cands[static_cast<std::size_t>(i)].cpi;
      if (c <= 0.0) continue;
      if (best < 0 || c > cands[static_cast<std::size_t>(best)].cpi) best = i;
    }
    if (best < 0) {
      trace.status = SelectionStatus::Infeasible;
      record(0);
      return {state, trace};
    }

    const int chosen = current[static_cast<std::size_t>(best)];
    record(chosen);
    removed.push_back(chosen);
    current.erase(current.begin() + best);
    state = cands[static_cast<std::size_t>(best)];
    if (on_visit) on_visit(state);
  }

  if (!stop(static_cast<int>(current.size()), state.cost))
    trace.status = SelectionStatus::Infeasible;  // ran out of removable sensors
  record(0);
  return {state, trace};
}

}  // namespace

std::pair<SelectionState, SelectionTrace> greedy_remove(const SystemModel& model,
                                                        const SensorCatalog& catalog,
                                                        const SelectionConfig& config) {
  SubsetEvaluator ev(model, catalog, config);
  const double G = config.budget;
  return greedy_core(
      ev, [G](int, double cost) { return cost <= G; }, nullptr);
}

SelectionState exhaustive_select(const SystemModel& model, const SensorCatalog& catalog,
                                 const SelectionConfig& config) {
  catalog.validate(model.n);
  const int m = catalog.size();
  if (m > 20)
    throw ConfigError("exhaustive_select: catalog size " + std::to_string(m) +
                      " exceeds the enumeration cap of 20");
  SubsetEvaluator ev(model, catalog, config);

  bool found = false;
  SelectionState best;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> ids;
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        ids.push_back(i + 1);
        cost += catalog.by_id(i + 1).cost;
      }
    if (cost > config.budget) continue;
    SelectionState st = ev.evaluate(ids);
    if (!st.observable) continue;
    if (!found || st.lambda > best.lambda ||
        (st.lambda == best.lambda && st.selected_ids < best.selected_ids)) {
      best = st;
      found = true;
    }
  }
  if (!found)
    throw InfeasibleError("exhaustive_select: no observable subset within budget");
  return best;
}

std::vector<FrontierPoint> alpha_sweep(const SystemModel& model,
                                       const SensorCatalog& catalog,
                                       const SelectionConfig& config,
                                       const std::vector<double>& alphas,
                                       const std::vector<int>& target_sizes) {
  if (alphas.empty()) throw ConfigError("alpha_sweep: no alpha values given");
  if (target_sizes.empty()) throw ConfigError("alpha_sweep: no target sizes given");
  const int m = catalog.size();
  int min_size = m;
  for (int s : target_sizes) {
    if (s < 1 || s > m)
      throw ConfigError("alpha_sweep: target size " + std::to_string(s) +
                        " outside 1.." + std::to_string(m));
    min_size = std::min(min_size, s);
  }

  std::vector<int> sizes = target_sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<FrontierPoint> frontier;
  for (double a : alphas) {
    SelectionConfig run = config;
    run.alpha = a;
    SubsetEvaluator ev(model, catalog, run);

    std::vector<FrontierPoint> hits;
    auto visit = [&](const SelectionState& st) {
      int size = static_cast<int>(st.selected_ids.size());
      if (std::find(sizes.begin(), sizes.end(), size) != sizes.end()) {
        FrontierPoint p;
        p.alpha = a;
        p.size = size;
        p.lambda = st.lambda;
        p.cost = st.cost;
        p.feasible = true;
        hits.push_back(p);
      }
    };
    greedy_core(
        ev, [min_size](int size, double) { return size <= min_size; }, visit);

    for (int s : sizes) {
      auto it = std::find_if(hits.begin(), hits.end(),
                             [s](const FrontierPoint& p) { return p.size == s; });
      if (it != hits.end()) {
        frontier.push_back(*it);
      } else {
        FrontierPoint p;
        p.alpha = a;
        p.size = s;
        p.feasible = false;
        frontier.push_back(p);
      }
    }
  }
  return frontier;
}

}  // namespace obsel
