#include "obsel/model.hpp"

#include <cmath>
#include <random>

#include "obsel/errors.hpp"
#include "obsel/rng.hpp"

namespace obsel {

VectorXd SystemModel::eval_algebraic(const VectorXd& x, const VectorXd& u) const {
  if (n_alg == 0 || !algebraic) return VectorXd();
  return algebraic(x, u);
}

namespace {

void check_finite(const VectorXd& v, int step_index) {
  if (!v.allFinite())
    throw DivergedSimulation(
        "simulation produced a non-finite state at step " + std::to_string(step_index),
        step_index);
}

}  // namespace

Trajectory simulate(const SystemModel& model, const VectorXd& x0,
                    const std::vector<VectorXd>& inputs, int horizon,
                    const std::optional<NoiseSpec>& noise, std::uint64_t seed) {
  if (horizon < 0) throw ConfigError("simulate: horizon must be non-negative");
  if (x0.size() != model.n)
    throw ConfigError("simulate: x0 has size " + std::to_string(x0.size()) +
                      ", model expects " + std::to_string(model.n));
  if (!model.step) throw ConfigError("simulate: model has no step map");
  const bool needs_input = model.n_in > 0;
  if (needs_input && static_cast<int>(inputs.size()) < std::max(horizon, 1))
    throw ConfigError("simulate: need at least " + std::to_string(std::max(horizon, 1)) +
                      " inputs, got " + std::to_string(inputs.size()));
  if (noise && noise->process_std.size() != model.n)
    throw ConfigError("simulate: process_std size does not match state dimension");

  auto input_at = [&](int k) -> VectorXd {
    if (!needs_input) return VectorXd();
    int last = static_cast<int>(inputs.size()) - 1;
    return inputs[static_cast<std::size_t>(std::min(k, last))];
  };

  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.algebraics.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.inputs.reserve(static_cast<std::size_t>(horizon) + 1);
  if (noise) traj.noise_seed = seed;

  std::mt19937_64 eng = substream_engine(seed, "process-noise");
  std::normal_distribution<double> gauss(0.0, 1.0);

  VectorXd x = x0;
  check_finite(x, 0);
  for (int k = 0; k <= horizon; ++k) {
    VectorXd u = input_at(k);
    VectorXd a = model.eval_algebraic(x, u);
    traj.states.push_back(x);
    traj.algebraics.push_back(a);
    traj.inputs.push_back(u);
    if (k == horizon) break;
    VectorXd next = model.step(x, a, u);
    if (noise) {
      for (int i = 0; i < model.n; ++i)
        next(i) += noise->process_std(i) * gauss(eng);
    }
    check_finite(next, k + 1);
    x = next;
  }
  return traj;
}

Trajectory simulate_nominal(const SystemModel& model, int horizon) {
  if (model.x_ref.size() != model.n)
    throw ConfigError("simulate_nominal: model has no operating point");
  std::vector<VectorXd> inputs;
  if (model.n_in > 0)
    inputs.assign(static_cast<std::size_t>(std::max(horizon, 1)) + 1, model.u_ref);
  return simulate(model, model.x_ref, inputs, horizon);
}

MatrixXd finite_difference_jacobian(const SystemModel& model, const VectorXd& x,
                                    const VectorXd& u, double h) {
  if (x.size() != model.n) throw ConfigError("finite_difference_jacobian: bad x size");
  if (h <= 0) throw ConfigError("finite_difference_jacobian: h must be positive");
  MatrixXd J(model.n, model.n);
  for (int i = 0; i < model.n; ++i) {
    double hi = h * std::max(1.0, std::abs(x(i)));
    VectorXd xp = x, xm = x;
    xp(i) += hi;
    xm(i) -= hi;
    VectorXd fp = model.step(xp, model.eval_algebraic(xp, u), u);
    VectorXd fm = model.step(xm, model.eval_algebraic(xm, u), u);
    J.col(i) = (fp - fm) / (2.0 * hi);
  }
  return J;
}

SystemModel generate_random_linear(const RandomLinearSpec& spec, std::uint64_t seed) {
  if (spec.n < 1) throw ConfigError("generate_random_linear: n must be positive");
  if (spec.off_diag_fraction < 0.0 || spec.off_diag_fraction > 1.0)
    throw ConfigError("generate_random_linear: off_diag_fraction must be in [0, 1]");

  std::mt19937_64 eng = substream_engine(seed, "linear-model");
  std::normal_distribution<double> diag(spec.diag_mean, spec.diag_std);
  std::normal_distribution<double> off(0.0, spec.off_diag_std);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MatrixXd A = MatrixXd::Zero(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i) A(i, i) = diag(eng);
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j) {
      if (i == j) continue;
      if (unit(eng) < spec.off_diag_fraction) A(i, j) = off(eng);
    }
  return make_linear_model(A);
}

SystemModel make_linear_model(const MatrixXd& A, double sample_interval_minutes) {
  if (A.rows() != A.cols()) throw ConfigError("make_linear_model: matrix must be square");
  SystemModel m;
  m.n = static_cast<int>(A.rows());
  m.n_alg = 0;
  m.n_in = 0;
  m.sample_interval_minutes = sample_interval_minutes;
  m.step = [A](const VectorXd& x, const VectorXd&, const VectorXd&) -> VectorXd {
    return A * x;
  };
  m.jac_state = [A](const VectorXd&, const VectorXd&, const VectorXd&) -> MatrixXd {
    return A;
  };
  m.x_ref = VectorXd::Ones(m.n);
  return m;
}

SystemModel quadratic_scalar_model() {
  SystemModel m;
  m.n = 1;
  m.n_alg = 0;
  m.n_in = 0;
  m.step = [](const VectorXd& x, const VectorXd&, const VectorXd&) -> VectorXd {
    VectorXd y(1);
    y(0) = x(0) * x(0);
    return y;
  };
  m.jac_state = [](const VectorXd& x, const VectorXd&, const VectorXd&) -> MatrixXd {
    MatrixXd J(1, 1);
    J(0, 0) = 2.0 * x(0);
    return J;
  };
  m.x_ref = VectorXd::Ones(1);
  return m;
}

VectorXd find_steady_state(const SystemModel& model, const VectorXd& x_guess,
                           const VectorXd& u, int max_iters, double tol,
                           double damping) {
  if (x_guess.size() != model.n) throw ConfigError("find_steady_state: bad guess size");
  VectorXd x = x_guess;
  const MatrixXd I = MatrixXd::Identity(model.n, model.n);
  for (int it = 0; it < max_iters; ++it) {
    VectorXd a = model.eval_algebraic(x, u);
    VectorXd r = model.step(x, a, u) - x;
    if (!r.allFinite())
      throw NumericalError("find_steady_state: non-finite residual");
    double rel = 0.0;
    for (int i = 0; i < model.n; ++i)
      rel = std::max(rel, std::abs(r(i)) / std::max(1.0, std::abs(x(i))));
    if (rel < tol) return x;
    MatrixXd J = model.jac_state(x, a, u);
    VectorXd dx = (I - J).partialPivLu().solve(r);
    if (!dx.allFinite())
      throw NumericalError("find_steady_state: singular Newton system");
    x += damping * dx;
  }
  throw NumericalError("find_steady_state: no convergence within iteration limit");
}

}  // namespace obsel
