#include "obsel/resilient.hpp"

#include <algorithm>
#include <functional>

#include "obsel/errors.hpp"
#include "obsel/parallel.hpp"

namespace obsel {

SensorMultiset SensorMultiset::from_ids(const std::vector<int>& ids, int catalog_size) {
  SensorMultiset ms;
  ms.counts.assign(static_cast<std::size_t>(catalog_size), 0);
  for (int id : ids) {
    if (id < 1 || id > catalog_size)
      throw ConfigError("multiset id " + std::to_string(id) + " outside catalog");
    ++ms.counts[static_cast<std::size_t>(id - 1)];
  }
  return ms;
}

std::vector<int> SensorMultiset::expanded() const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (int c = 0; c < counts[i]; ++c) ids.push_back(static_cast<int>(i) + 1);
  return ids;
}

int SensorMultiset::copies() const {
  int total = 0;
  for (int c : counts) total += c;
  return total;
}

double SensorMultiset::cost(const SensorCatalog& catalog) const {
  double g = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    g += counts[i] * catalog.by_id(static_cast<int>(i) + 1).cost;
  return g;
}

void SensorMultiset::add(int id) {
  if (id < 1 || id > static_cast<int>(counts.size()))
    throw ConfigError("multiset add: id outside catalog");
  ++counts[static_cast<std::size_t>(id - 1)];
}

namespace {

/// Visits every size-r subset of {0..q-1} in lexicographic order.
template <typename Fn>
void for_each_combination(int q, int r, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    fn(idx);
    int pos = r - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == q - r + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < r; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

WorstCaseResult worst_case_lambda(const SubsetEvaluator& evaluator,
                                  const SensorMultiset& selection, int failures) {
  if (failures < 0) throw ConfigError("worst_case_lambda: negative failure count");
  const std::vector<int> copies = selection.expanded();
  const int q = static_cast<int>(copies.size());
  if (q == 0) throw ConfigError("worst_case_lambda: empty selection");

  WorstCaseResult res;
  if (failures == 0) {
    res.worst_lambda = evaluator.evaluate_multiset(copies).lambda;
    res.evaluations = 1;
    return res;
  }

  bool first = true;
  for (int r = 1; r <= std::min(failures, q); ++r) {
    for_each_combination(q, r, [&](const std::vector<int>& failed) {
      std::vector<int> survivors;
      survivors.reserve(static_cast<std::size_t>(q - r));
      int fpos = 0;
      for (int i = 0; i < q; ++i) {
        if (fpos < r && failed[static_cast<std::size_t>(fpos)] == i) {
          ++fpos;
          continue;
        }
        survivors.push_back(copies[static_cast<std::size_t>(i)]);
      }
      double lam = 0.0;
      if (!survivors.empty())
        lam = evaluator.evaluate_multiset(survivors).lambda;
      ++res.evaluations;
      if (first || lam < res.worst_lambda ||
          (lam == res.worst_lambda && failed < res.scenario.failed_copies)) {
        res.worst_lambda = lam;
        res.scenario.failed_copies = failed;
        first = false;
      }
    });
  }
  return res;
}

WorstCaseResult worst_case_lambda(const SystemModel& model, const SensorCatalog& catalog,
                                  const SensorMultiset& selection, int failures,
                                  const SelectionConfig& config) {
  SubsetEvaluator ev(model, catalog, config);
  return worst_case_lambda(ev, selection, failures);
}

ResilientResult greedy_add(const SystemModel& model, const SensorCatalog& catalog,
                           const std::vector<int>& base_ids,
                           const SelectionConfig& config,
                           const ResilientConfig& resilient) {
  if (resilient.max_additions < 0)
    throw ConfigError("greedy_add: negative addition limit");
  if (resilient.failures < 0) throw ConfigError("greedy_add: negative failure count");
  if (resilient.extra_budget < 0) throw ConfigError("greedy_add: negative extra budget");

  SubsetEvaluator ev(model, catalog, config);
  const int m = catalog.size();
  SensorMultiset current = SensorMultiset::from_ids(base_ids, m);
  if (current.copies() == 0) throw ConfigError("greedy_add: empty base selection");

  SelectionState nominal = ev.evaluate_multiset(current.expanded());
  if (!nominal.observable)
    throw InfeasibleError("greedy_add: the base selection is not observable");

  ResilientResult result;
  result.base_ids = current.expanded();
  result.failures = resilient.failures;
  result.worst_lambda = nominal.lambda;

  double spent = 0.0;
  for (int round = 1; round <= resilient.max_additions; ++round) {
    std::vector<WorstCaseResult> scores =
        parallel_map<WorstCaseResult>(m, [&](int i) {
          SensorMultiset trial = current;
          trial.add(i + 1);
          return worst_case_lambda(ev, trial, resilient.failures);
        });

    ResilientRound rec;
    rec.round = round;
    long evals = 0;
    int best = 0;
    for (int i = 0; i < m; ++i) {
      const WorstCaseResult& w = scores[static_cast<std::size_t>(i)];
      rec.candidate_worst.emplace_back(i + 1, w.worst_lambda);
      evals += w.evaluations;
      if (w.worst_lambda > scores[static_cast<std::size_t>(best)].worst_lambda) best = i;
    }
    rec.evaluations = evals;

    const int chosen = best + 1;
    const double price = catalog.by_id(chosen).cost;
    if (spent + price > resilient.extra_budget) {
      rec.chosen_id = 0;
      result.rounds.push_back(std::move(rec));
      break;
    }
    rec.chosen_id = chosen;
    result.rounds.push_back(std::move(rec));
    current.add(chosen);
    spent += price;
    result.added_ids.push_back(chosen);
    result.worst_lambda = scores[static_cast<std::size_t>(best)].worst_lambda;
  }

  if (!result.added_ids.empty()) {
    std::sort(result.added_ids.begin(), result.added_ids.end());
  } else if (resilient.max_additions > 0) {
    // Nothing was admitted; report how the base itself holds up.
    result.worst_lambda =
        worst_case_lambda(ev, current, resilient.failures).worst_lambda;
  }
  result.extra_cost = spent;
  return result;
}

ResilientResult exhaustive_resilient(const SystemModel& model, const SensorCatalog& catalog,
                                     const std::vector<int>& base_ids,
                                     const SelectionConfig& config,
                                     const ResilientConfig& resilient) {
  const int m = catalog.size();
  if (m > 12)
    throw ConfigError("exhaustive_resilient: catalog size exceeds the cap of 12");
  if (resilient.max_additions > 2)
    throw ConfigError("exhaustive_resilient: addition limit exceeds the cap of 2");

  SubsetEvaluator ev(model, catalog, config);
  SensorMultiset base = SensorMultiset::from_ids(base_ids, m);
  if (base.copies() == 0) throw ConfigError("exhaustive_resilient: empty base");
  if (!ev.evaluate_multiset(base.expanded()).observable)
    throw InfeasibleError("exhaustive_resilient: the base selection is not observable");

  std::vector<std::vector<int>> additions{{}};
  std::vector<int> stack;
  std::function<void(int, int)> grow = [&](int from, int remaining) {
    if (remaining == 0) return;
    for (int id = from; id <= m; ++id) {
      stack.push_back(id);
      additions.push_back(stack);
      grow(id, remaining - 1);
      stack.pop_back();
    }
  };
  grow(1, resilient.max_additions);

  bool found = false;
  ResilientResult best;
  for (const std::vector<int>& add : additions) {
    double extra = 0.0;
    for (int id : add) extra += catalog.by_id(id).cost;
    if (extra > resilient.extra_budget) continue;
    SensorMultiset trial = base;
    for (int id : add) trial.add(id);
    WorstCaseResult w = worst_case_lambda(ev, trial, resilient.failures);
    bool better = !found || w.worst_lambda > best.worst_lambda ||
                  (w.worst_lambda == best.worst_lambda &&
                   (add.size() < best.added_ids.size() ||
                    (add.size() == best.added_ids.size() && add < best.added_ids)));
    if (better) {
      best.base_ids = base.expanded();
      best.added_ids = add;
      best.extra_cost = extra;
      best.worst_lambda = w.worst_lambda;
      best.failures = resilient.failures;
      found = true;
    }
  }
  return best;
}

}  // namespace obsel
