#include "obsel/sensitivity.hpp"

#include <cmath>

#include "obsel/errors.hpp"

namespace obsel {

TransitionChain propagate_chain(const SystemModel& model, const Trajectory& traj) {
  if (traj.states.empty()) throw ConfigError("propagate_chain: empty trajectory");
  if (traj.states.front().size() != model.n)
    throw ConfigError("propagate_chain: trajectory does not match model dimension");
  if (!model.jac_state) throw ConfigError("propagate_chain: model has no Jacobian");

  const int K = traj.horizon();
  TransitionChain chain;
  chain.phi.reserve(static_cast<std::size_t>(K) + 1);
  chain.phi.push_back(MatrixXd::Identity(model.n, model.n));
  for (int k = 0; k < K; ++k) {
    const MatrixXd J = model.jac_state(traj.states[static_cast<std::size_t>(k)],
                                       traj.algebraics[static_cast<std::size_t>(k)],
                                       traj.inputs[static_cast<std::size_t>(k)]);
    if (J.rows() != model.n || J.cols() != model.n)
      throw ConfigError("propagate_chain: Jacobian has wrong shape");
    MatrixXd next = J * chain.phi.back();
    if (!next.allFinite())
      throw NumericalError("propagate_chain: non-finite transition at step " +
                           std::to_string(k + 1));
    chain.phi.push_back(std::move(next));
  }
  return chain;
}

StackedSensitivity build_sensitivity(const MatrixXd& C, const TransitionChain& chain,
                                     const std::vector<int>& sensor_ids) {
  const int m = static_cast<int>(C.rows());
  if (m == 0) throw ConfigError("build_sensitivity: no sensor rows selected");
  if (chain.phi.empty()) throw ConfigError("build_sensitivity: empty chain");
  const int n = static_cast<int>(chain.phi.front().cols());
  if (C.cols() != n)
    throw ConfigError("build_sensitivity: C has " + std::to_string(C.cols()) +
                      " columns, chain expects " + std::to_string(n));
  if (!sensor_ids.empty() && static_cast<int>(sensor_ids.size()) != m)
    throw ConfigError("build_sensitivity: sensor_ids length does not match C");

  const int K1 = static_cast<int>(chain.phi.size());
  StackedSensitivity out;
  out.S.resize(static_cast<Eigen::Index>(K1) * m, n);
  out.row_sensor.reserve(static_cast<std::size_t>(K1) * static_cast<std::size_t>(m));
  out.row_time.reserve(out.row_sensor.capacity());
  for (int k = 0; k < K1; ++k) {
    const MatrixXd& phi = chain.phi[static_cast<std::size_t>(k)];
    for (int r = 0; r < m; ++r) {
      // Row-by-row product: the value of a row depends only on that row of C
      // and on Phi(k), so subset selection and full-catalog slicing agree
      // bitwise.
      out.S.row(static_cast<Eigen::Index>(k) * m + r).noalias() = C.row(r) * phi;
      out.row_sensor.push_back(sensor_ids.empty() ? r + 1
                                                  : sensor_ids[static_cast<std::size_t>(r)]);
      out.row_time.push_back(k);
    }
  }
  return out;
}

StackedSensitivity fd_sensitivity_oracle(const SystemModel& model, const MatrixXd& C,
                                         const VectorXd& x0,
                                         const std::vector<VectorXd>& inputs,
                                         int horizon, double h) {
  if (C.rows() == 0) throw ConfigError("fd_sensitivity_oracle: no sensor rows");
  if (C.cols() != model.n) throw ConfigError("fd_sensitivity_oracle: C width mismatch");
  if (h <= 0) throw ConfigError("fd_sensitivity_oracle: h must be positive");

  const int m = static_cast<int>(C.rows());
  const int K1 = horizon + 1;
  StackedSensitivity out;
  out.S.resize(static_cast<Eigen::Index>(K1) * m, model.n);
  for (int i = 0; i < model.n; ++i) {
    double hi = h * std::max(1.0, std::abs(x0(i)));
    VectorXd xp = x0, xm = x0;
    xp(i) += hi;
    xm(i) -= hi;
    Trajectory tp = simulate(model, xp, inputs, horizon);
    Trajectory tm = simulate(model, xm, inputs, horizon);
    for (int k = 0; k < K1; ++k) {
      VectorXd dyk = C * ((tp.states[static_cast<std::size_t>(k)] -
                           tm.states[static_cast<std::size_t>(k)]) /
                          (2.0 * hi));
      out.S.block(static_cast<Eigen::Index>(k) * m, i, m, 1) = dyk;
    }
  }
  for (int k = 0; k < K1; ++k)
    for (int r = 0; r < m; ++r) {
      out.row_sensor.push_back(r + 1);
      out.row_time.push_back(k);
    }
  return out;
}

}  // namespace obsel
