#pragma once

#include <Eigen/Dense>
#include <vector>

namespace obsel {

/// Outcome of scoring a sensitivity matrix.
struct ObservabilityResult {
  double lambda = 0.0;              ///< sum of pivot norms, or 0 if rank deficient
  int numerical_rank = 0;           ///< accepted pivot count
  bool observable = false;          ///< numerical_rank == column count
  std::vector<double> pivot_norms;  ///< N_1 >= N_2 >= ... for accepted pivots
  std::vector<int> pivot_order;     ///< original column index per pivot (0-based)
};

/// Scores the columns of S by successive orthogonalization.
///
/// Each stage picks the remaining column with the largest residual norm
/// (ties resolved toward the lower original index), records that norm as the
/// stage's pivot norm, and projects the other residuals onto the pivot's
/// orthogonal complement. The picked pivot is first re-orthogonalized
/// against the span of the earlier pivots, which keeps the basis orthogonal
/// to working precision on graded matrices.
///
/// The scan stops once the largest residual norm falls below
/// rank_tol * N_1, where N_1 is the largest column norm of the input. If
/// every column is accepted the matrix has full numerical column rank and
/// lambda is the sum of all pivot norms; otherwise lambda is 0, so an
/// unobservable configuration never scores. Columns are taken in the units
/// the matrix carries; rescaling a state rescales its contribution.
ObservabilityResult successive_orthogonalization(const Eigen::MatrixXd& S,
                                                 double rank_tol = 1e-10);

/// Shorthand for the lambda field of successive_orthogonalization.
double degree_of_observability(const Eigen::MatrixXd& S, double rank_tol = 1e-10);

}  // namespace obsel
