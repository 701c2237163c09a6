#include <doctest.h>

#include <cmath>
#include <random>

#include "obsel/errors.hpp"
#include "obsel/observability.hpp"
#include "support/oracles.hpp"

using namespace obsel;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("identity columns score their count") {
  const int n = 7;
  ObservabilityResult r = successive_orthogonalization(MatrixXd::Identity(n, n));
  CHECK(r.observable);
  CHECK(r.numerical_rank == n);
  CHECK(r.lambda == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
}

TEST_CASE("orthogonal columns score the sum of their norms") {
  MatrixXd S = MatrixXd::Zero(10, 4);
  const double norms[4] = {5.0, 3.0, 2.0, 0.5};
  for (int j = 0; j < 4; ++j) S(2 * j, j) = norms[j];
  ObservabilityResult r = successive_orthogonalization(S);
  CHECK(r.observable);
  CHECK(r.lambda == doctest::Approx(10.5).epsilon(1e-12));
  // Stages are taken largest-first.
  REQUIRE(r.pivot_norms.size() == 4);
  for (std::size_t i = 1; i < r.pivot_norms.size(); ++i)
    CHECK(r.pivot_norms[i - 1] >= r.pivot_norms[i]);
  CHECK(r.pivot_order[0] == 0);
  CHECK(r.pivot_order[3] == 3);
}

TEST_CASE("rank deficiency zeroes the score") {
  MatrixXd S(6, 3);
  std::mt19937_64 eng(1);
  S.leftCols(2) = testsup::random_gaussian(6, 2, eng);
  S.col(2) = 2.0 * S.col(0) - S.col(1);
  ObservabilityResult r = successive_orthogonalization(S);
  CHECK_FALSE(r.observable);
  CHECK(r.numerical_rank == 2);
  CHECK(r.lambda == 0.0);

  MatrixXd Z = MatrixXd::Zero(4, 2);
  ObservabilityResult z = successive_orthogonalization(Z);
  CHECK_FALSE(z.observable);
  CHECK(z.numerical_rank == 0);
  CHECK(z.lambda == 0.0);
}

TEST_CASE("duplicating every row scales the score by sqrt 2") {
  std::mt19937_64 eng(2);
  MatrixXd S = testsup::random_gaussian(40, 8, eng);
  double lam = successive_orthogonalization(S).lambda;
  MatrixXd D(80, 8);
  D << S, S;
  double lam2 = successive_orthogonalization(D).lambda;
  CHECK(std::abs(lam2 - std::sqrt(2.0) * lam) <= 1e-10 * lam2);
}

TEST_CASE("column permutations leave the score unchanged") {
  std::mt19937_64 eng(3);
  MatrixXd S = testsup::random_gaussian(30, 6, eng);
  double lam = successive_orthogonalization(S).lambda;
  std::vector<int> perm{3, 0, 5, 1, 4, 2};
  MatrixXd P = MatrixXd::Zero(30, 6);
  for (int j = 0; j < 6; ++j) P.col(j) = S.col(perm[static_cast<std::size_t>(j)]);
  double lamP = successive_orthogonalization(P).lambda;
  CHECK(std::abs(lam - lamP) <= 1e-10 * lam);
}

TEST_CASE("norm ties resolve toward the lower column index") {
  MatrixXd S = MatrixXd::Zero(4, 3);
  S(0, 0) = 2.0;
  S(1, 1) = 2.0;  // same norm as column 0
  S(2, 2) = 1.0;
  ObservabilityResult r = successive_orthogonalization(S);
  REQUIRE(r.pivot_order.size() == 3);
  CHECK(r.pivot_order[0] == 0);
  CHECK(r.pivot_order[1] == 1);
}

TEST_CASE("the acceptance threshold scales with the largest column norm") {
  const double tol = 1e-10;
  MatrixXd S = MatrixXd::Zero(4, 2);
  S(0, 0) = 1000.0;

  S(1, 1) = 1000.0 * tol * 2.0;  // above threshold: accepted
  CHECK(successive_orthogonalization(S, tol).observable);

  S(1, 1) = 1000.0 * tol * 0.5;  // below threshold: rejected
  ObservabilityResult r = successive_orthogonalization(S, tol);
  CHECK_FALSE(r.observable);
  CHECK(r.numerical_rank == 1);
}

TEST_CASE("score equals the sum of recorded pivot norms") {
  std::mt19937_64 eng(4);
  MatrixXd S = testsup::random_gaussian(25, 5, eng);
  ObservabilityResult r = successive_orthogonalization(S);
  double sum = 0.0;
  for (double p : r.pivot_norms) sum += p;
  CHECK(r.lambda == doctest::Approx(sum).epsilon(1e-12));
  CHECK(degree_of_observability(S) == r.lambda);
}

TEST_CASE("rank agrees with the singular value decomposition") {
  std::mt19937_64 eng(5);
  std::uniform_int_distribution<int> rows(10, 40), cols(3, 12);
  for (int trial = 0; trial < 30; ++trial) {
    const int r = rows(eng), c = cols(eng);
    MatrixXd S = testsup::random_gaussian(r, c, eng);
    ObservabilityResult res = successive_orthogonalization(S);
    CHECK(res.numerical_rank == testsup::svd_rank(S, 1e-10));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const int r = rows(eng), c = cols(eng);
    MatrixXd S = testsup::random_gaussian(r, c, eng);
    S.col(c - 1) = S.col(0);  // constructed dependency
    ObservabilityResult res = successive_orthogonalization(S);
    CHECK(res.numerical_rank == c - 1);
    CHECK(res.numerical_rank == testsup::svd_rank(S, 1e-10));
  }
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(successive_orthogonalization(MatrixXd()), ConfigError);
  MatrixXd bad = MatrixXd::Ones(2, 2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(successive_orthogonalization(bad), NumericalError);
  CHECK_THROWS_AS(successive_orthogonalization(MatrixXd::Ones(2, 2), -1.0), ConfigError);
}
