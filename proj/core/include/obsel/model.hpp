#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace obsel {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Discrete-time system with an optional algebraic layer:
///
///   a(k)   = algebraic(x(k), u(k))
///   x(k+1) = step(x(k), a(k), u(k))
///
/// `jac_state` must return the total derivative of the step map with respect
/// to x, i.e. d step / d x with the algebraic layer substituted in, so that
/// it matches a finite difference of x(k+1) with respect to x(k). Models
/// without an algebraic layer set n_alg = 0 and receive an empty `a`.
struct SystemModel {
  int n = 0;       ///< differential state dimension
  int n_alg = 0;   ///< algebraic variable dimension
  int n_in = 0;    ///< input dimension
  double sample_interval_minutes = 2.0;

  std::function<VectorXd(const VectorXd& x, const VectorXd& a, const VectorXd& u)> step;
  std::function<VectorXd(const VectorXd& x, const VectorXd& u)> algebraic;
  std::function<MatrixXd(const VectorXd& x, const VectorXd& a, const VectorXd& u)> jac_state;

  /// Reference operating point: nominal trajectories and estimator tuning
  /// are anchored here. `u_ref` is held constant over nominal horizons.
  VectorXd x_ref;
  VectorXd u_ref;

  std::vector<std::string> labels;  ///< optional state names, size n or empty

  /// Evaluates the algebraic layer, returning an empty vector when n_alg = 0.
  VectorXd eval_algebraic(const VectorXd& x, const VectorXd& u) const;
};

/// Gaussian disturbance description. Standard deviations are per component;
/// simulation uses only `process_std`, estimator harnesses use both.
struct NoiseSpec {
  VectorXd process_std;      ///< size n, additive on x(k+1)
  VectorXd measurement_std;  ///< size = sensor count, additive on y(k)
};

/// A simulated path. states has horizon+1 entries; algebraics and inputs are
/// aligned with states index by index (each algebraic entry is an empty
/// vector when the model has no algebraic layer).
struct Trajectory {
  std::vector<VectorXd> states;
  std::vector<VectorXd> algebraics;
  std::vector<VectorXd> inputs;
  std::optional<std::uint64_t> noise_seed;

  int horizon() const { return static_cast<int>(states.size()) - 1; }
};

/// Rolls the model forward `horizon` steps from x0.
///
/// `inputs` must supply at least `horizon` entries (one extra is used for the
/// final algebraic evaluation when present; otherwise the last entry is
/// repeated). Pass `noise` to add seeded Gaussian process noise to each
/// state update; omit it for the exact deterministic recursion. Throws
/// DivergedSimulation if any state component leaves the finite range.
Trajectory simulate(const SystemModel& model, const VectorXd& x0,
                    const std::vector<VectorXd>& inputs, int horizon,
                    const std::optional<NoiseSpec>& noise = std::nullopt,
                    std::uint64_t seed = 0);

/// Convenience: constant-input simulation from the model operating point.
Trajectory simulate_nominal(const SystemModel& model, int horizon);

/// Central-difference Jacobian of the one-step map at (x, u). Evaluates the
/// algebraic layer inside each perturbed step, so the result is the total
/// derivative and can be compared against `jac_state` directly. The step `h`
/// is scaled per component by max(1, |x_i|).
MatrixXd finite_difference_jacobian(const SystemModel& model, const VectorXd& x,
                                    const VectorXd& u, double h = 1e-6);

/// Ingredients of the benchmark random linear family: x(k+1) = A x(k) with
/// every diagonal entry drawn from N(0.9, 1) and a seeded fraction of the
/// off-diagonal positions drawn from N(0, 0.1^2). All states are directly
/// measurable (identity candidate rows).
struct RandomLinearSpec {
  int n = 30;
  double off_diag_fraction = 0.1;
  double diag_mean = 0.9;
  double diag_std = 1.0;
  double off_diag_std = 0.1;
};

/// Builds the random linear model for `spec` and `seed`. Identical arguments
/// give a bitwise identical matrix. The operating point is the all-ones state.
SystemModel generate_random_linear(const RandomLinearSpec& spec, std::uint64_t seed);

/// Wraps an explicit discrete-time matrix as a SystemModel.
SystemModel make_linear_model(const MatrixXd& A, double sample_interval_minutes = 2.0);

/// Scalar map x(k+1) = x(k)^2, operating point x = 1. Used as a curved test
/// system whose sensitivity chain is known in closed form.
SystemModel quadratic_scalar_model();

/// Damped Newton search for a fixed point of the one-step map with constant
/// input u. Returns the refined state; throws NumericalError if the residual
/// does not reach `tol` (relative, per component) within `max_iters`.
VectorXd find_steady_state(const SystemModel& model, const VectorXd& x_guess,
                           const VectorXd& u, int max_iters = 50,
                           double tol = 1e-12, double damping = 1.0);

}  // namespace obsel
