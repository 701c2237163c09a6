#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "obsel/model.hpp"
#include "obsel/observability.hpp"
#include "obsel/sensitivity.hpp"

namespace obsel {

/// One candidate measurement. Either `state_index` (1-based state that the
/// sensor reads directly) or an explicit output `row` of length n.
struct Sensor {
  int id = 0;             ///< 1-based, contiguous within a catalog
  std::string label;
  int state_index = 0;    ///< 1-based; 0 means `row` is used instead
  VectorXd row;
  double cost = 0.0;
};

/// The full set of candidate sensors for a model.
struct SensorCatalog {
  std::vector<Sensor> sensors;

  int size() const { return static_cast<int>(sensors.size()); }
  double total_cost() const;
  const Sensor& by_id(int id) const;

  /// Output matrix for the ascending-id subset `ids` (repeats allowed, each
  /// occurrence contributes its own row).
  MatrixXd output_matrix(const std::vector<int>& ids, int n) const;

  /// Checks ids are 1..m contiguous, costs positive, rows well formed.
  void validate(int n) const;
};

/// Evaluation and search settings shared across the selection routines.
struct SelectionConfig {
  double budget = 0.0;     ///< admissible total cost G
  double alpha = 1.0;      ///< cost exponent in the performance index
  int horizon = 0;         ///< sensitivity window K; 0 means use n
  double rank_tol = 1e-10;
};

/// A scored sensor subset.
struct SelectionState {
  std::vector<int> selected_ids;  ///< ascending
  double cost = 0.0;
  double lambda = 0.0;
  double cpi = 0.0;
  bool observable = false;
};

/// One row of the removal history: the set as it stood, its score, and the
/// sensor taken out of it (0 on the terminal row).
struct SelectionStep {
  int set_size = 0;
  std::vector<int> removed_set;   ///< sensors removed so far, in order
  double lambda = 0.0;
  double cost = 0.0;
  double cpi = 0.0;
  int removed_sensor = 0;
};

enum class SelectionStatus { BudgetMet, Infeasible };

struct SelectionTrace {
  std::vector<SelectionStep> steps;
  SelectionStatus status = SelectionStatus::BudgetMet;
  long candidate_evaluations = 0;  ///< subset scorings done while searching
};

/// Cost performance index: lambda / cost^alpha. An unobservable set scores 0
/// regardless of cost; alpha = 0 ignores cost entirely. Zero cost with
/// alpha > 0 and positive lambda has no finite value and throws.
double cpi(double lambda, double cost, double alpha);

/// Scores one subset from scratch: simulates the nominal trajectory,
/// propagates the Jacobian chain, stacks the subset's sensitivity rows and
/// orthogonalizes. Pure function of its arguments.
SelectionState evaluate_subset(const SystemModel& model, const SensorCatalog& catalog,
                               const std::vector<int>& ids, const SelectionConfig& config);

/// Precomputes the full-catalog stacked sensitivity once, then scores any
/// subset by selecting its rows. Agrees bitwise with evaluate_subset because
/// sensitivity rows are built row-by-row (see build_sensitivity).
class SubsetEvaluator {
 public:
  SubsetEvaluator(const SystemModel& model, const SensorCatalog& catalog,
                  const SelectionConfig& config);

  SelectionState evaluate(const std::vector<int>& ids) const;

  /// Rows allowing repeated ids; duplicated sensors contribute one row per
  /// copy, which is what resilient duplication relies on.
  SelectionState evaluate_multiset(const std::vector<int>& ids) const;

  const SensorCatalog& catalog() const { return *catalog_; }
  const SelectionConfig& config() const { return config_; }
  int state_dim() const { return n_; }

 private:
  const SensorCatalog* catalog_;
  SelectionConfig config_;
  int n_;
  MatrixXd full_S_;  ///< rows grouped by time block, catalog order inside
  int m_full_;
  int blocks_;
};

/// Removes sensors one at a time from the full catalog until the budget is
/// met. Each step scores every single-sensor removal, keeps the one with the
/// highest performance index (ties toward the lower id) and drops it. A
/// removal that destroys observability scores 0 and is never preferred over
/// an observability-preserving one; when only such removals remain the
/// search stops with Infeasible. Starting within budget returns the full
/// catalog untouched. Throws InfeasibleError if the full catalog itself is
/// unobservable.
std::pair<SelectionState, SelectionTrace> greedy_remove(const SystemModel& model,
                                                        const SensorCatalog& catalog,
                                                        const SelectionConfig& config);

/// Brute-force reference: enumerates every non-empty subset (catalog size
/// capped at 20), keeps the observable ones within budget and returns the
/// best lambda; ties go to the lexicographically smallest id set. Throws
/// InfeasibleError when nothing qualifies.
SelectionState exhaustive_select(const SystemModel& model, const SensorCatalog& catalog,
                                 const SelectionConfig& config);

/// One frontier point of an alpha sweep.
struct FrontierPoint {
  double alpha = 0.0;
  int size = 0;
  double lambda = 0.0;
  double cost = 0.0;
  bool feasible = false;
};

/// For each alpha, runs greedy removal down to the smallest requested size
/// and records the score and cost each time a requested size is passed.
/// Sizes that cannot be reached while staying observable are reported
/// infeasible. `alphas` must be non-empty; target sizes must be positive.
std::vector<FrontierPoint> alpha_sweep(const SystemModel& model,
                                       const SensorCatalog& catalog,
                                       const SelectionConfig& config,
                                       const std::vector<double>& alphas,
                                       const std::vector<int>& target_sizes);

}  // namespace obsel
