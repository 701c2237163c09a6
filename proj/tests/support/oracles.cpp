#include "oracles.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "obsel/observability.hpp"
#include "obsel/rng.hpp"
#include "obsel/sensitivity.hpp"

namespace testsup {

int svd_rank(const Eigen::MatrixXd& S, double rank_tol) {
  double n1 = 0.0;
  for (Eigen::Index j = 0; j < S.cols(); ++j) n1 = std::max(n1, S.col(j).norm());
  const double tol = rank_tol * n1;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  return rank;
}

Eigen::MatrixXd random_gaussian(int rows, int cols, std::mt19937_64& eng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = gauss(eng);
  return M;
}

RandomInstance random_instance(int n, int m, std::uint64_t seed, double cost_lo,
                               double cost_hi) {
  RandomInstance inst;
  obsel::RandomLinearSpec spec;
  spec.n = n;
  inst.model = obsel::generate_random_linear(spec, obsel::substream_seed(seed, "instance-model"));

  std::mt19937_64 eng = obsel::substream_engine(seed, "instance-costs");
  std::uniform_real_distribution<double> cost(cost_lo, cost_hi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 1; i <= m; ++i) {
    obsel::Sensor s;
    s.id = i;
    s.label = "s" + std::to_string(i);
    if (i <= n) {
      s.state_index = i;
    } else {
      Eigen::VectorXd row(n);
      for (int j = 0; j < n; ++j) row(j) = gauss(eng);
      s.row = row / row.norm();
    }
    s.cost = cost(eng);
    inst.catalog.sensors.push_back(std::move(s));
  }
  return inst;
}

std::vector<Eigen::VectorXd> kf_oracle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                       const std::vector<Eigen::VectorXd>& measurements,
                                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                       const Eigen::MatrixXd& P0,
                                       const Eigen::VectorXd& x0) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = x0;
  Eigen::MatrixXd P = P0;
  std::vector<Eigen::VectorXd> out;
  out.reserve(measurements.size());
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const Eigen::MatrixXd S = C * P * C.transpose() + R;
    const Eigen::MatrixXd K = P * C.transpose() * S.inverse();
    x = x + K * (measurements[k] - C * x);
    P = (I - K * C) * P;
    out.push_back(x);
    if (k + 1 < measurements.size()) {
      x = A * x;
      P = A * P * A.transpose() + Q;
    }
  }
  return out;
}

RemovalChoice best_single_removal(const obsel::SystemModel& model,
                                  const obsel::SensorCatalog& catalog,
                                  const std::vector<int>& current,
                                  const obsel::SelectionConfig& config) {
  RemovalChoice choice;
  bool have = false;
  double best = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    std::vector<int> ids = current;
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(i));
    if (ids.empty()) continue;
    obsel::SelectionState st = obsel::evaluate_subset(model, catalog, ids, config);
    if (st.cpi <= 0.0) continue;
    if (!have || st.cpi > best) {
      have = true;
      best = st.cpi;
      choice.removed_id = current[i];
      choice.cpi = st.cpi;
    }
  }
  return choice;
}

MaskBest best_subset_by_mask(const obsel::SystemModel& model,
                             const obsel::SensorCatalog& catalog,
                             const obsel::SelectionConfig& config) {
  const int m = catalog.size();
  if (m > 20) throw std::runtime_error("best_subset_by_mask: catalog too large");
  MaskBest best;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> ids;
    double cost = 0.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) {
        ids.push_back(i + 1);
        cost += catalog.by_id(i + 1).cost;
      }
    if (cost > config.budget) continue;
    obsel::SelectionState st = obsel::evaluate_subset(model, catalog, ids, config);
    if (!st.observable) continue;
    if (!best.found || st.lambda > best.lambda ||
        (st.lambda == best.lambda && ids < best.ids)) {
      best.found = true;
      best.lambda = st.lambda;
      best.ids = ids;
    }
  }
  return best;
}

namespace {

/// Scores an id list (duplicates allowed) by stacking the corresponding
/// output rows directly; independent of the library's multiset plumbing.
double score_copies(const obsel::SystemModel& model, const obsel::SensorCatalog& catalog,
                    const std::vector<int>& copies, const obsel::SelectionConfig& config) {
  if (copies.empty()) return 0.0;
  const int K = config.horizon == 0 ? model.n : config.horizon;
  obsel::Trajectory traj = obsel::simulate_nominal(model, K);
  obsel::TransitionChain chain = obsel::propagate_chain(model, traj);
  Eigen::MatrixXd C(static_cast<Eigen::Index>(copies.size()), model.n);
  for (std::size_t r = 0; r < copies.size(); ++r) {
    std::vector<int> one{copies[r]};
    C.row(static_cast<Eigen::Index>(r)) = catalog.output_matrix(one, model.n).row(0);
  }
  obsel::StackedSensitivity S = obsel::build_sensitivity(C, chain);
  return obsel::degree_of_observability(S.S, config.rank_tol);
}

}  // namespace

double worst_single_failure(const obsel::SystemModel& model,
                            const obsel::SensorCatalog& catalog,
                            const std::vector<int>& copies,
                            const obsel::SelectionConfig& config) {
  double worst = 0.0;
  bool first = true;
  for (std::size_t f = 0; f < copies.size(); ++f) {
    std::vector<int> survivors = copies;
    survivors.erase(survivors.begin() + static_cast<std::ptrdiff_t>(f));
    const double lam = score_copies(model, catalog, survivors, config);
    if (first || lam < worst) {
      worst = lam;
      first = false;
    }
  }
  return worst;
}

AdditionChoice best_single_addition(const obsel::SystemModel& model,
                                    const obsel::SensorCatalog& catalog,
                                    const std::vector<int>& base_copies,
                                    const obsel::SelectionConfig& config) {
  AdditionChoice choice;
  bool first = true;
  for (int id = 1; id <= catalog.size(); ++id) {
    std::vector<int> copies = base_copies;
    copies.push_back(id);
    std::sort(copies.begin(), copies.end());
    const double worst = worst_single_failure(model, catalog, copies, config);
    if (first || worst > choice.worst) {
      choice.id = id;
      choice.worst = worst;
      first = false;
    }
  }
  return choice;
}

ProcResult run_command(const std::string& cmd) {
  ProcResult res;
  const std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed: " + cmd);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testsup
