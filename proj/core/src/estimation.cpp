#include "obsel/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "obsel/errors.hpp"
#include "obsel/rng.hpp"

namespace obsel {

namespace {

constexpr double kScaleFloor = 1e-3;

double scale_of(double v) { return std::max(std::abs(v), kScaleFloor); }

}  // namespace

EKFConfig default_ekf_config(const SystemModel& model, const MatrixXd& C_sel) {
  if (model.x_ref.size() != model.n)
    throw ConfigError("default_ekf_config: model has no operating point");
  const VectorXd& xs = model.x_ref;
  const int n = model.n;
  const int m = static_cast<int>(C_sel.rows());

  EKFConfig cfg;
  cfg.Q_w = MatrixXd::Zero(n, n);
  cfg.P0 = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = scale_of(xs(i));
    cfg.Q_w(i, i) = std::pow(0.004 * s, 2);
    cfg.P0(i, i) = std::pow(0.01 * s, 2);
  }
  const VectorXd ys = C_sel * xs;
  cfg.R_v = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) cfg.R_v(i, i) = std::pow(0.02 * scale_of(ys(i)), 2);
  cfg.x_hat0 = 1.1 * xs;
  return cfg;
}

EstimateRun ekf_run(const SystemModel& model, const MatrixXd& C_sel,
                    const std::vector<VectorXd>& measurements,
                    const std::vector<VectorXd>& inputs, const EKFConfig& config) {
  if (measurements.empty()) throw ConfigError("ekf_run: no measurements");
  const int n = model.n;
  const int m = static_cast<int>(C_sel.rows());
  if (C_sel.cols() != n) throw ConfigError("ekf_run: C width does not match the model");
  if (config.x_hat0.size() != n) throw ConfigError("ekf_run: bad initial estimate size");
  if (config.Q_w.rows() != n || config.P0.rows() != n || config.R_v.rows() != m)
    throw ConfigError("ekf_run: covariance dimensions do not match");
  const int K = static_cast<int>(measurements.size()) - 1;
  if (model.n_in > 0 && static_cast<int>(inputs.size()) < std::max(K, 1))
    throw ConfigError("ekf_run: not enough inputs for the horizon");

  auto input_at = [&](int k) -> VectorXd {
    if (model.n_in == 0) return VectorXd();
    int last = static_cast<int>(inputs.size()) - 1;
    return inputs[static_cast<std::size_t>(std::min(k, last))];
  };

  const MatrixXd I = MatrixXd::Identity(n, n);
  VectorXd xh = config.x_hat0;
  MatrixXd P = config.P0;

  EstimateRun run;
  run.estimates.reserve(measurements.size());
  run.covariance_diag.reserve(measurements.size());

  for (int k = 0; k <= K; ++k) {
    const VectorXd& y = measurements[static_cast<std::size_t>(k)];
    if (y.size() != m) throw ConfigError("ekf_run: measurement size mismatch at step " +
                                         std::to_string(k));

    MatrixXd S = C_sel * P * C_sel.transpose() + config.R_v;
    Eigen::LDLT<MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      const double ridge = 1e-12 * (S.trace() / m + 1.0);
      S += ridge * MatrixXd::Identity(m, m);
      ldlt.compute(S);
      run.regularized = true;
      if (ldlt.info() != Eigen::Success)
        throw NumericalError("ekf_run: innovation covariance is not positive definite");
    }
    const MatrixXd gain = ldlt.solve(C_sel * P).transpose();
    xh = xh + gain * (y - C_sel * xh);
    const MatrixXd ikc = I - gain * C_sel;
    P = ikc * P * ikc.transpose() + gain * config.R_v * gain.transpose();
    P = 0.5 * (P + P.transpose());

    if (!xh.allFinite())
      throw DivergedSimulation("ekf_run: estimate diverged at step " + std::to_string(k), k);
    run.estimates.push_back(xh);
    run.covariance_diag.push_back(P.diagonal());

    if (k == K) break;
    const VectorXd u = input_at(k);
    const VectorXd a = model.eval_algebraic(xh, u);
    const MatrixXd F = model.jac_state(xh, a, u);
    xh = model.step(xh, a, u);
    P = F * P * F.transpose() + config.Q_w;
    P = 0.5 * (P + P.transpose());
    if (!xh.allFinite())
      throw DivergedSimulation("ekf_run: prediction diverged after step " + std::to_string(k),
                               k + 1);
  }
  return run;
}

namespace {

ComparisonCase run_case(const SystemModel& model, const SensorCatalog& catalog,
                        const std::vector<int>& ids, double lambda,
                        const Trajectory& truth, const MatrixXd& unit_noise,
                        const std::vector<VectorXd>& inputs) {
  const int n = model.n;
  const MatrixXd C = catalog.output_matrix(ids, n);
  const int m = static_cast<int>(C.rows());
  const VectorXd ys = C * model.x_ref;
  const int K = truth.horizon();

  std::vector<VectorXd> measurements;
  measurements.reserve(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    VectorXd y = C * truth.states[static_cast<std::size_t>(k)];
    for (int r = 0; r < m; ++r) {
      const int sensor = ids[static_cast<std::size_t>(r)] - 1;
      y(r) += 0.02 * scale_of(ys(r)) * unit_noise(k, sensor);
    }
    measurements.push_back(std::move(y));
  }

  EKFConfig cfg = default_ekf_config(model, C);
  EstimateRun run = ekf_run(model, C, measurements, inputs, cfg);

  ComparisonCase out;
  out.ids = ids;
  out.lambda = lambda;
  for (int id : ids) out.cost += catalog.by_id(id).cost;
  out.rmse_per_state = VectorXd::Zero(n);
  double accum = 0.0;
  for (int k = 0; k <= K; ++k) {
    const VectorXd err =
        run.estimates[static_cast<std::size_t>(k)] - truth.states[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      out.rmse_per_state(i) += err(i) * err(i);
      const double rel = err(i) / scale_of(model.x_ref(i));
      accum += rel * rel;
    }
  }
  const double steps = static_cast<double>(K + 1);
  for (int i = 0; i < n; ++i)
    out.rmse_per_state(i) = std::sqrt(out.rmse_per_state(i) / steps);
  out.rmse_total = std::sqrt(accum / (steps * n));
  return out;
}

}  // namespace

ComparisonReport compare_selections(const SystemModel& model, const SensorCatalog& catalog,
                                    const SelectionState& selected, int trials,
                                    int horizon, std::uint64_t seed,
                                    const SelectionConfig& config) {
  if (trials <= 0) throw ConfigError("compare_selections: trials must be positive");
  if (horizon < 1) throw ConfigError("compare_selections: horizon must be positive");
  if (selected.selected_ids.empty())
    throw ConfigError("compare_selections: empty selected set");
  catalog.validate(model.n);
  if (model.x_ref.size() != model.n)
    throw ConfigError("compare_selections: model has no operating point");

  const int m_full = catalog.size();

  // Shared noise: one truth realization, one unit draw per sensor and step.
  NoiseSpec noise;
  noise.process_std = VectorXd::Zero(model.n);
  for (int i = 0; i < model.n; ++i)
    noise.process_std(i) = 0.004 * scale_of(model.x_ref(i));
  std::vector<VectorXd> inputs;
  if (model.n_in > 0)
    inputs.assign(static_cast<std::size_t>(horizon) + 1, model.u_ref);
  Trajectory truth = simulate(model, model.x_ref, inputs, horizon, noise,
                              substream_seed(seed, "comparison-truth"));

  std::mt19937_64 meas_eng = substream_engine(seed, "comparison-measurement");
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd unit_noise(horizon + 1, m_full);
  for (int k = 0; k <= horizon; ++k)
    for (int sidx = 0; sidx < m_full; ++sidx) unit_noise(k, sidx) = gauss(meas_eng);

  SubsetEvaluator evaluator(model, catalog, config);

  ComparisonReport report;
  report.requested_trials = trials;
  report.selected = run_case(model, catalog, selected.selected_ids, selected.lambda,
                             truth, unit_noise, inputs);

  std::mt19937_64 draw_eng = substream_engine(seed, "comparison-draws");
  const double budget = report.selected.cost;
  const int attempts_cap = 60 * trials;
  int attempts = 0;
  while (static_cast<int>(report.alternatives.size()) < trials && attempts < attempts_cap) {
    ++attempts;
    std::vector<int> order(static_cast<std::size_t>(m_full));
    std::iota(order.begin(), order.end(), 1);
    std::shuffle(order.begin(), order.end(), draw_eng);
    std::vector<int> ids;
    double cost = 0.0;
    for (int id : order) {
      const double price = catalog.by_id(id).cost;
      if (cost + price <= budget) {
        ids.push_back(id);
        cost += price;
      }
    }
    if (ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    SelectionState st = evaluator.evaluate(ids);
    if (!st.observable) continue;
    report.alternatives.push_back(
        run_case(model, catalog, ids, st.lambda, truth, unit_noise, inputs));
  }

  std::vector<double> rmses;
  for (const ComparisonCase& c : report.alternatives) rmses.push_back(c.rmse_total);
  std::sort(rmses.begin(), rmses.end());
  if (!rmses.empty()) {
    const std::size_t h = rmses.size() / 2;
    report.median_alternative_rmse =
        (rmses.size() % 2 == 1) ? rmses[h] : 0.5 * (rmses[h - 1] + rmses[h]);
  }
  report.selected_rank = 1;
  for (const ComparisonCase& c : report.alternatives)
    if (c.rmse_total < report.selected.rmse_total) ++report.selected_rank;
  return report;
}

}  // namespace obsel
