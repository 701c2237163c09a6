#include "obsel/observability.hpp"

#include <cmath>

#include "obsel/errors.hpp"

namespace obsel {

ObservabilityResult successive_orthogonalization(const Eigen::MatrixXd& S,
                                                 double rank_tol) {
  if (S.size() == 0) throw ConfigError("successive_orthogonalization: empty matrix");
  if (!S.allFinite())
    throw NumericalError("successive_orthogonalization: non-finite input");
  if (rank_tol < 0) throw ConfigError("successive_orthogonalization: negative tolerance");

  const int n = static_cast<int>(S.cols());
  const Eigen::Index rows = S.rows();

  Eigen::MatrixXd R = S;                 // residual columns
  Eigen::MatrixXd Q(rows, n);            // accepted pivot directions
  std::vector<bool> active(static_cast<std::size_t>(n), true);

  ObservabilityResult res;
  res.pivot_norms.reserve(static_cast<std::size_t>(n));
  res.pivot_order.reserve(static_cast<std::size_t>(n));

  double n1 = 0.0;
  for (int j = 0; j < n; ++j) n1 = std::max(n1, R.col(j).norm());
  const double threshold = rank_tol * n1;

  double sum = 0.0;
  for (int stage = 0; stage < n; ++stage) {
    int pivot = -1;
    double best = -1.0;
    for (int j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      double norm = R.col(j).norm();
      if (norm > best) {
        best = norm;
        pivot = j;
      }
    }
    if (pivot < 0 || best <= threshold || best == 0.0) break;

    // One clean-up pass against the accepted basis before normalizing; the
    // running projections below leave O(eps) components behind on strongly
    // graded inputs.
    Eigen::VectorXd v = R.col(pivot);
    for (int p = 0; p < stage; ++p) v -= Q.col(p).dot(v) * Q.col(p);
    double norm = v.norm();
    if (norm <= threshold || norm == 0.0) break;

    Q.col(stage) = v / norm;
    res.pivot_norms.push_back(norm);
    res.pivot_order.push_back(pivot);
    sum += norm;
    active[static_cast<std::size_t>(pivot)] = false;

    for (int j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)]) continue;
      R.col(j) -= Q.col(stage).dot(R.col(j)) * Q.col(stage);
    }
  }

  res.numerical_rank = static_cast<int>(res.pivot_norms.size());
  res.observable = (res.numerical_rank == n);
  res.lambda = res.observable ? sum : 0.0;
  return res;
}

double degree_of_observability(const Eigen::MatrixXd& S, double rank_tol) {
  return successive_orthogonalization(S, rank_tol).lambda;
}

}  // namespace obsel
