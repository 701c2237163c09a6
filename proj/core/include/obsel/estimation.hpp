#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "obsel/model.hpp"
#include "obsel/selection.hpp"

namespace obsel {

/// Extended Kalman filter tuning.
struct EKFConfig {
  MatrixXd Q_w;      ///< process noise covariance, n x n
  MatrixXd R_v;      ///< measurement noise covariance, m x m
  MatrixXd P0;       ///< initial state covariance, n x n
  VectorXd x_hat0;   ///< initial state estimate
};

/// Standard tuning anchored at the model operating point: process noise at
/// 0.4% of each steady state component, measurement noise at 2% of each
/// steady output, initial covariance at 1% and the initial estimate offset
/// 10% high. Components whose steady value is 0 get a small absolute floor
/// so the covariances stay positive definite.
EKFConfig default_ekf_config(const SystemModel& model, const MatrixXd& C_sel);

struct EstimateRun {
  std::vector<VectorXd> estimates;    ///< filtered states, one per sample
  std::vector<VectorXd> covariance_diag;
  bool regularized = false;           ///< an innovation covariance needed a ridge
};

/// Runs the filter over a measurement record: predict with the model step,
/// linearize with the total step Jacobian, update with a Joseph-form
/// covariance correction and re-symmetrize. measurements[k] is the output at
/// sample k; the first update happens at sample 0 against x_hat0/P0.
/// Throws DivergedSimulation if the estimate leaves the finite range.
EstimateRun ekf_run(const SystemModel& model, const MatrixXd& C_sel,
                    const std::vector<VectorXd>& measurements,
                    const std::vector<VectorXd>& inputs, const EKFConfig& config);

/// One contender in a comparison experiment.
struct ComparisonCase {
  std::vector<int> ids;
  double cost = 0.0;
  double lambda = 0.0;
  double rmse_total = 0.0;      ///< RMS of steady-state-relative errors
  VectorXd rmse_per_state;      ///< natural units, per state
};

struct ComparisonReport {
  ComparisonCase selected;
  std::vector<ComparisonCase> alternatives;
  int selected_rank = 0;        ///< 1 = best of all cases
  double median_alternative_rmse = 0.0;
  int requested_trials = 0;     ///< alternatives asked for; fewer means some draws failed
};

/// Simulates one noisy truth from the operating point, then runs identical
/// EKF experiments for the selected set and `trials` random observable sets
/// of no higher cost. All cases share the same process noise realization and
/// per-sensor measurement noise streams, so differences come from the sensor
/// choice alone. Random sets that stay unobservable after a capped number of
/// draws are skipped and reported.
ComparisonReport compare_selections(const SystemModel& model, const SensorCatalog& catalog,
                                    const SelectionState& selected, int trials,
                                    int horizon, std::uint64_t seed,
                                    const SelectionConfig& config);

}  // namespace obsel
