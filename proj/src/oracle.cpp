#include "fmeca/oracle.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

namespace fmeca::oracle {

namespace {

/// Index-based view of the model so subset evaluation is integer work plus
/// one exact cost sum; results match fmeca::objective() bit for bit.
struct Enumeration {
  const FmecaModel* model = nullptr;
  std::vector<std::string> action_ids;  // sorted; subset ordering follows it
  std::vector<Rational> costs;          // by action index

  struct FmRow {
    std::array<int, 3> initial{1, 1, 1};
    std::array<int, 3> minimum{1, 1, 1};
    int threshold = 1;
    std::vector<std::array<int, 3>> deltas;  // by action index
  };
  std::vector<FmRow> rows;

  std::uint64_t evaluated = 0;
  std::vector<std::uint8_t> chosen;

  std::optional<std::vector<std::uint8_t>> best_subset;
  Objective best_objective;
  std::optional<std::vector<std::uint8_t>> budget_subset;
  Objective budget_objective;

  void build(const FmecaModel& m) {
    model = &m;
    for (const auto& action : m.actions) action_ids.push_back(action.id);
    std::sort(action_ids.begin(), action_ids.end());
    costs.reserve(action_ids.size());
    for (const auto& id : action_ids) costs.push_back(m.action(id)->cost);

    for (const auto& fm : m.failure_modes) {
      FmRow row;
      row.threshold = fm.critical_threshold;
      for (size_t d = 0; d < 3; ++d) {
        Dimension dim = kDimensions[d];
        row.initial[d] = fm.rank(dim).value;
        row.minimum[d] = m.scale(dim).min_rank();
      }
      row.deltas.reserve(action_ids.size());
      for (const auto& id : action_ids) {
        std::array<int, 3> delta{0, 0, 0};
        auto it = m.action(id)->mitigations.find(fm.id);
        if (it != m.action(id)->mitigations.end()) {
          delta = {it->second.severity, it->second.occurrence, it->second.detectability};
        }
        row.deltas.push_back(delta);
      }
      rows.push_back(std::move(row));
    }
    chosen.assign(action_ids.size(), 0);
  }

  Objective eval(const std::vector<std::uint8_t>& flags) const {
    Objective obj;
    for (size_t a = 0; a < flags.size(); ++a) {
      if (flags[a]) obj.cost += costs[a];
    }
    for (const FmRow& row : rows) {
      int product = 1;
      for (size_t d = 0; d < 3; ++d) {
        int reduction = 0;
        for (size_t a = 0; a < flags.size(); ++a) {
          if (flags[a]) reduction += row.deltas[a][d];
        }
        product *= std::clamp(row.initial[d] - reduction, row.minimum[d], row.initial[d]);
      }
      if (product > row.threshold) {
        obj.violations += 1;
        obj.excess += product - row.threshold;
      }
    }
    return obj;
  }

  static size_t count(const std::vector<std::uint8_t>& flags) {
    size_t n = 0;
    for (std::uint8_t f : flags) n += f;
    return n;
  }

  /// Canonical subset order: fewer actions first, then the lexicographically
  /// smaller id sequence (equivalently, the flag vector compared on the
  /// sorted ids, descending, because a leading 1 means the smallest id is in).
  bool canonically_before(const std::vector<std::uint8_t>& a,
                          const std::vector<std::uint8_t>& b) const {
    size_t na = count(a), nb = count(b);
    if (na != nb) return na < nb;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }

  void consider(const std::vector<std::uint8_t>& flags) {
    ++evaluated;
    Objective obj = eval(flags);
    if (!best_subset || obj < best_objective ||
        (obj == best_objective && canonically_before(flags, *best_subset))) {
      best_subset = flags;
      best_objective = obj;
    }
    if (!(model->budget < obj.cost)) {
      if (!budget_subset || obj < budget_objective ||
          (obj == budget_objective && canonically_before(flags, *budget_subset))) {
        budget_subset = flags;
        budget_objective = obj;
      }
    }
  }

  void enumerate_all() {
    const size_t n = action_ids.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
      for (size_t i = 0; i < n; ++i) chosen[i] = (mask >> i) & 1;
      consider(chosen);
    }
  }

  /// Depth-first include/exclude search. Adding actions never increases
  /// violations or excess and never decreases cost, so
  /// (violations(all remaining in), excess(all remaining in), cost(chosen))
  /// bounds every leaf of the subtree componentwise, hence
  /// lexicographically. A subtree is cut only when that bound already loses
  /// to both incumbents (the global optimum and the within-budget optimum),
  /// which keeps pruned and unpruned results identical.
  void enumerate_pruned(size_t index, const Rational& chosen_cost) {
    if (best_subset) {
      std::vector<std::uint8_t> everything = chosen;
      for (size_t i = index; i < everything.size(); ++i) everything[i] = 1;
      Objective bound = eval(everything);
      bound.cost = chosen_cost;

      bool may_improve_best = !(best_objective < bound);
      bool subtree_fits_budget = !(model->budget < bound.cost);
      bool may_improve_budget =
          subtree_fits_budget && (!budget_subset || !(budget_objective < bound));
      if (!may_improve_best && !may_improve_budget) return;
    }
    if (index == action_ids.size()) {
      consider(chosen);
      return;
    }
    chosen[index] = 1;
    enumerate_pruned(index + 1, chosen_cost + costs[index]);
    chosen[index] = 0;
    enumerate_pruned(index + 1, chosen_cost);
  }

  std::set<std::string> ids(const std::vector<std::uint8_t>& flags) const {
    std::set<std::string> out;
    for (size_t i = 0; i < flags.size(); ++i) {
      if (flags[i]) out.insert(action_ids[i]);
    }
    return out;
  }
};

}  // namespace

OracleResult exact_best(const FmecaModel& model, int limit, bool prune) {
  if (static_cast<int>(model.actions.size()) > limit) {
    throw std::invalid_argument("instance has " + std::to_string(model.actions.size()) +
                                " actions, above the enumeration limit of " +
                                std::to_string(limit));
  }
  std::vector<Diagnostic> diagnostics = validate(model);
  for (const auto& d : diagnostics) {
    if (d.code == "relation-type-3-unsupported" || d.code == "relation-type-4-unsupported") {
      throw std::invalid_argument(d.message);
    }
  }
  if (has_errors(diagnostics)) {
    throw std::invalid_argument("model failed validation; run validate first");
  }

  Enumeration e;
  e.build(model);
  if (prune) {
    e.enumerate_pruned(0, Rational(0));
  } else {
    e.enumerate_all();
  }

  OracleResult result;
  result.enumerated_count = e.evaluated;
  result.optimal = evaluate(model, e.ids(*e.best_subset));
  result.optimal_objective = e.best_objective;
  result.budget_best = evaluate(model, e.ids(*e.budget_subset));
  result.budget_best_objective = e.budget_objective;
  result.feasible_exists = e.budget_objective.violations == 0;
  return result;
}

GapReport compare(const Objective& solver_best, bool solver_feasible,
                  std::string_view solver_digest, const OracleResult& oracle,
                  std::string_view oracle_digest) {
  if (solver_digest != oracle_digest) {
    throw std::invalid_argument("model digests differ: solver result is for " +
                                std::string(solver_digest) + ", oracle result for " +
                                std::string(oracle_digest));
  }
  if (solver_best < oracle.optimal_objective) {
    throw std::logic_error("solver result beats the oracle optimum; the oracle is not optimal");
  }

  GapReport report;
  report.solver_objective = solver_best;
  report.oracle_objective = oracle.optimal_objective;
  report.cost_gap_abs = solver_best.cost - oracle.optimal_objective.cost;
  if (report.cost_gap_abs.is_negative()) report.cost_gap_abs = Rational(0);
  if (!oracle.optimal_objective.cost.is_zero()) {
    report.cost_gap_rel = report.cost_gap_abs / oracle.optimal_objective.cost;
  } else if (report.cost_gap_abs.is_zero()) {
    report.cost_gap_rel = Rational(0);
  }
  report.feasibility_agreement = solver_feasible == oracle.feasible_exists;
  report.solver_optimal = solver_best == oracle.optimal_objective;
  return report;
}

}  // namespace fmeca::oracle
