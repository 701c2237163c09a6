#pragma once

#include <Eigen/Dense>
#include <vector>

#include "obsel/model.hpp"

namespace obsel {

/// Transition matrices Phi(k) of a trajectory: Phi(0) = I and
/// Phi(k+1) = J(x(k), a(k), u(k)) * Phi(k), where J is the model's total
/// step Jacobian. Column j of Phi(k) is the sensitivity of x(k) to the j-th
/// component of the initial state.
struct TransitionChain {
  std::vector<MatrixXd> phi;  ///< horizon+1 matrices, each n x n

  int horizon() const { return static_cast<int>(phi.size()) - 1; }
};

/// Stacked sensitivity of the measured outputs over a window:
/// block k (rows k*m .. k*m+m-1) equals C * Phi(k). `row_sensor` and
/// `row_time` map each row back to the sensor id and sample index it
/// came from.
struct StackedSensitivity {
  MatrixXd S;                 ///< (horizon+1)*m by n
  std::vector<int> row_sensor;
  std::vector<int> row_time;

  int cols() const { return static_cast<int>(S.cols()); }
  int rows() const { return static_cast<int>(S.rows()); }
};

/// Runs the Jacobian recursion along an already simulated trajectory.
TransitionChain propagate_chain(const SystemModel& model, const Trajectory& traj);

/// Stacks C * Phi(k) for all k. `sensor_ids` labels the rows of C (1-based
/// ids; defaults to 1..m when empty). Each output row is computed as
/// row(C) * Phi(k), so selecting a subset of C's rows afterwards gives
/// bitwise the same values as rebuilding with the reduced C.
StackedSensitivity build_sensitivity(const MatrixXd& C, const TransitionChain& chain,
                                     const std::vector<int>& sensor_ids = {});

/// Independent route to the same matrix: perturbs each initial state
/// component, re-simulates without noise and differences the measured
/// outputs. Never touches jac_state or the chain; intended as a check.
StackedSensitivity fd_sensitivity_oracle(const SystemModel& model, const MatrixXd& C,
                                         const VectorXd& x0,
                                         const std::vector<VectorXd>& inputs,
                                         int horizon, double h = 1e-6);

}  // namespace obsel
