#pragma once

#include <set>
#include <string>
#include <vector>

#include "fmeca/diagnostics.hpp"
#include "fmeca/model.hpp"

namespace fmeca {

/// Failure criticality: the severity * occurrence * detectability product.
/// Pre: ranks already validated against their scales.
int criticality(Rank severity, Rank occurrence, Rank detectability);

/// Scale-checked variant; throws std::out_of_range when a rank lies outside
/// its scale.
int criticality(const FmecaModel& model, Rank severity, Rank occurrence, Rank detectability);

int initial_criticality(const FailureMode& fm);

struct RankTriple {
  Rank severity;
  Rank occurrence;
  Rank detectability;

  Rank rank(Dimension dimension) const;
  auto operator<=>(const RankTriple&) const = default;
};

/// Residual ranks after applying the mitigations of the selected actions:
/// per dimension, clamp(initial - sum of deltas, scale_min, initial).
/// Selected actions without a mitigation entry for the failure mode
/// contribute nothing.
RankTriple residual_ranks(const FmecaModel& model, const FailureMode& fm,
                          const std::set<std::string>& selected_action_ids);

int residual_criticality(const FmecaModel& model, const FailureMode& fm,
                         const std::set<std::string>& selected_action_ids);

/// Strictly above the critical threshold means critical; equal is acceptable.
bool is_critical(const FmecaModel& model, const FailureMode& fm,
                 const std::set<std::string>& selected_action_ids);

/// Exact sum of selected action costs; each action counts once no matter how
/// many failure modes it serves. Throws std::invalid_argument on unknown ids.
Rational total_cost(const FmecaModel& model, const std::set<std::string>& selected_action_ids);

Objective objective(const FmecaModel& model, const std::set<std::string>& selected_action_ids);

/// Full derived view of a selection (cost, residuals, verdicts, objective).
Configuration evaluate(const FmecaModel& model, const std::set<std::string>& selected_action_ids);

/// Structural and referential checks. Errors make a model unacceptable to
/// the solver; warnings flag suspicious but usable input. Pure: repeated
/// calls return identical diagnostics.
std::vector<Diagnostic> validate(const FmecaModel& model);

}  // namespace fmeca
