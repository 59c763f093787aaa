#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fmeca/core.hpp"

namespace fmeca::oracle {

struct OracleResult {
  Configuration optimal;  // lexicographic optimum over all subsets
  Objective optimal_objective;
  /// True when some configuration meets every threshold within the budget.
  bool feasible_exists = false;
  std::uint64_t enumerated_count = 0;  // subsets fully evaluated
  /// Lexicographic optimum among configurations with cost within budget
  /// (the empty selection always qualifies).
  Configuration budget_best;
  Objective budget_best_objective;
};

/// Exhaustive subset enumeration of the action set. Ties on the objective
/// break canonically: fewer actions, then lexicographically smaller id
/// sequence. With prune=true, branches are cut only when a componentwise
/// lower bound already loses to the incumbent, so pruned and unpruned runs
/// return identical optima. Throws std::invalid_argument when the instance
/// exceeds `limit` actions or uses unsupported relation types.
OracleResult exact_best(const FmecaModel& model, int limit = 20, bool prune = false);

struct GapReport {
  Objective solver_objective;
  Objective oracle_objective;
  Rational cost_gap_abs;
  /// Relative cost gap; absent when the oracle optimum costs nothing and
  /// the solver result does not.
  std::optional<Rational> cost_gap_rel;
  bool feasibility_agreement = false;
  bool solver_optimal = false;  // zero objective gap
};

/// Gap between a solver result and the oracle optimum. Throws
/// std::invalid_argument on digest mismatch and std::logic_error if the
/// solver result lexicographically beats the oracle optimum.
GapReport compare(const Objective& solver_best, bool solver_feasible,
                  std::string_view solver_digest, const OracleResult& oracle,
                  std::string_view oracle_digest);

}  // namespace fmeca::oracle
