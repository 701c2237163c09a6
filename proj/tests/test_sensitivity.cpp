#include <doctest.h>

#include <cmath>

#include "obsel/errors.hpp"
#include "obsel/model.hpp"
#include "obsel/sensitivity.hpp"

using namespace obsel;

TEST_CASE("transition chain starts at identity and composes Jacobians") {
  MatrixXd A(2, 2);
  A << 0.9, 0.1, 0.0, 0.8;
  SystemModel m = make_linear_model(A);
  Trajectory t = simulate_nominal(m, 3);
  TransitionChain chain = propagate_chain(m, t);
  REQUIRE(chain.horizon() == 3);
  CHECK((chain.phi[0] - MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK((chain.phi[2] - A * A).norm() < 1e-14);
  CHECK((chain.phi[3] - A * A * A).norm() < 1e-14);
}

TEST_CASE("curved scalar map has the closed form chain 1, 2x, ...") {
  // x(k+1) = x(k)^2 from x0 = 1: Phi(1) = 2, Phi(2) = 2*x(1)*Phi(1) = 4.
  SystemModel m = quadratic_scalar_model();
  Trajectory t = simulate_nominal(m, 2);
  TransitionChain chain = propagate_chain(m, t);
  MatrixXd C = MatrixXd::Identity(1, 1);
  StackedSensitivity S = build_sensitivity(C, chain);
  REQUIRE(S.rows() == 3);
  CHECK(S.S(0, 0) == doctest::Approx(1.0));
  CHECK(S.S(1, 0) == doctest::Approx(2.0));
  CHECK(S.S(2, 0) == doctest::Approx(4.0));
}

TEST_CASE("stacked blocks of a linear system are the matrix powers") {
  MatrixXd A(3, 3);
  A << 0.9, 0.05, 0.0, 0.1, 0.7, 0.2, 0.0, 0.0, 1.1;
  SystemModel m = make_linear_model(A);
  Trajectory t = simulate_nominal(m, 4);
  TransitionChain chain = propagate_chain(m, t);
  MatrixXd C(2, 3);
  C << 1, 0, 0, 0, 0, 1;
  StackedSensitivity S = build_sensitivity(C, chain);
  REQUIRE(S.rows() == 10);
  MatrixXd P = MatrixXd::Identity(3, 3);
  for (int k = 0; k <= 4; ++k) {
    CHECK((S.S.middleRows(2 * k, 2) - C * P).norm() < 1e-12);
    P = A * P;
  }
}

TEST_CASE("row bookkeeping maps back to sensor and sample") {
  MatrixXd A = MatrixXd::Identity(2, 2);
  SystemModel m = make_linear_model(A);
  Trajectory t = simulate_nominal(m, 2);
  TransitionChain chain = propagate_chain(m, t);
  MatrixXd C = MatrixXd::Identity(2, 2);
  StackedSensitivity S = build_sensitivity(C, chain, {4, 9});
  REQUIRE(S.rows() == 6);
  CHECK(S.row_sensor == std::vector<int>{4, 9, 4, 9, 4, 9});
  CHECK(S.row_time == std::vector<int>{0, 0, 1, 1, 2, 2});
  StackedSensitivity D = build_sensitivity(C, chain);
  CHECK(D.row_sensor == std::vector<int>{1, 2, 1, 2, 1, 2});
}

TEST_CASE("selecting rows after stacking equals stacking the reduced map") {
  MatrixXd A(3, 3);
  A << 0.9, 0.2, 0.0, 0.0, 0.8, 0.1, 0.1, 0.0, 0.7;
  SystemModel m = make_linear_model(A);
  Trajectory t = simulate_nominal(m, 3);
  TransitionChain chain = propagate_chain(m, t);
  MatrixXd C = MatrixXd::Identity(3, 3);
  StackedSensitivity full = build_sensitivity(C, chain);
  StackedSensitivity sub = build_sensitivity(C.middleRows(1, 1), chain);
  for (int k = 0; k <= 3; ++k)
    CHECK((full.S.row(3 * k + 1) - sub.S.row(k)).norm() == 0.0);
}

TEST_CASE("finite difference oracle agrees with the chain") {
  SUBCASE("linear") {
    MatrixXd A(3, 3);
    A << 0.9, 0.1, 0.0, 0.0, 0.85, 0.1, 0.05, 0.0, 0.8;
    SystemModel m = make_linear_model(A);
    MatrixXd C(1, 3);
    C << 1, 1, 0;
    Trajectory t = simulate_nominal(m, 5);
    TransitionChain chain = propagate_chain(m, t);
    StackedSensitivity S = build_sensitivity(C, chain);
    StackedSensitivity F = fd_sensitivity_oracle(m, C, m.x_ref, {}, 5);
    CHECK((S.S - F.S).norm() / S.S.norm() < 1e-9);
  }
  SUBCASE("curved scalar") {
    SystemModel m = quadratic_scalar_model();
    MatrixXd C = MatrixXd::Identity(1, 1);
    VectorXd x0(1);
    x0 << 0.9;
    Trajectory t = simulate(m, x0, {}, 6);
    TransitionChain chain = propagate_chain(m, t);
    StackedSensitivity S = build_sensitivity(C, chain);
    StackedSensitivity F = fd_sensitivity_oracle(m, C, x0, {}, 6);
    CHECK((S.S - F.S).norm() / S.S.norm() < 1e-6);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  MatrixXd A = MatrixXd::Identity(2, 2);
  SystemModel m = make_linear_model(A);
  Trajectory t = simulate_nominal(m, 2);
  TransitionChain chain = propagate_chain(m, t);
  MatrixXd C = MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(build_sensitivity(C, chain), ConfigError);
  MatrixXd C2 = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(build_sensitivity(C2, chain, {1}), ConfigError);
}
