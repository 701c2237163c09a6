#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "obsel/selection.hpp"

namespace obsel {

/// A sensor set with repetition: counts[i] copies of catalog id i+1.
/// Duplicate copies matter because each contributes its own measurement row
/// and fails independently.
struct SensorMultiset {
  std::vector<int> counts;

  static SensorMultiset from_ids(const std::vector<int>& ids, int catalog_size);
  /// Ascending id list with one entry per copy.
  std::vector<int> expanded() const;
  int copies() const;
  double cost(const SensorCatalog& catalog) const;
  void add(int id);
};

/// Copies knocked out in one failure scenario, as 0-based indices into
/// SensorMultiset::expanded().
struct FailureScenario {
  std::vector<int> failed_copies;
};

struct ResilientConfig {
  double extra_budget = 0.0;  ///< admissible spend on additions
  int max_additions = 1;      ///< rounds of greedy addition (w)
  int failures = 1;           ///< simultaneous sensor failures tolerated (R)
};

struct WorstCaseResult {
  double worst_lambda = 0.0;
  FailureScenario scenario;   ///< an achieving scenario (lex smallest on ties)
  long evaluations = 0;       ///< subset scorings performed
};

/// Minimum score over every way of losing up to `failures` copies. Failure
/// subsets of size 1..failures are enumerated (the nothing-failed case is
/// deliberately not part of the minimum; with failures = 0 the nominal score
/// is returned instead). A scenario that leaves no survivors scores 0.
WorstCaseResult worst_case_lambda(const SystemModel& model, const SensorCatalog& catalog,
                                  const SensorMultiset& selection, int failures,
                                  const SelectionConfig& config);

/// Same, on an already prepared evaluator.
WorstCaseResult worst_case_lambda(const SubsetEvaluator& evaluator,
                                  const SensorMultiset& selection, int failures);

struct ResilientRound {
  int round = 0;  ///< 1-based
  std::vector<std::pair<int, double>> candidate_worst;  ///< (id, worst score)
  int chosen_id = 0;  ///< 0 when the round ended without an addition
  long evaluations = 0;
};

struct ResilientResult {
  std::vector<int> base_ids;
  std::vector<int> added_ids;  ///< ascending, with multiplicity
  double extra_cost = 0.0;
  double worst_lambda = 0.0;
  int failures = 1;
  std::vector<ResilientRound> rounds;
};

/// Strengthens `base` against sensor loss by adding up to w catalog sensors,
/// duplicates allowed. Each round scores every candidate addition by its
/// worst-case lambda, takes the argmax (ties toward the lower id) and admits
/// it if the spend on additions stays within the extra budget; an
/// unaffordable winner ends the search. The base must be observable.
ResilientResult greedy_add(const SystemModel& model, const SensorCatalog& catalog,
                           const std::vector<int>& base_ids,
                           const SelectionConfig& config,
                           const ResilientConfig& resilient);

/// Brute-force reference: enumerates every affordable addition multiset of
/// size 0..w (catalog capped at 12, w capped at 2) and returns the best
/// worst-case score; ties prefer fewer additions, then the lexicographically
/// smallest id list.
ResilientResult exhaustive_resilient(const SystemModel& model, const SensorCatalog& catalog,
                                     const std::vector<int>& base_ids,
                                     const SelectionConfig& config,
                                     const ResilientConfig& resilient);

}  // namespace obsel
