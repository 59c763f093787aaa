#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fmeca/rational.hpp"

namespace fmeca {

enum class Dimension { severity, occurrence, detectability };

inline constexpr std::array<Dimension, 3> kDimensions = {
    Dimension::severity, Dimension::occurrence, Dimension::detectability};

std::string_view dimension_name(Dimension dimension);

struct Rank {
  int value = 1;
  auto operator<=>(const Rank&) const = default;
};

struct ScaleLevel {
  int rank = 1;
  std::string label;
  std::string description;
};

/// Ordered rating matrix for one dimension; ranks are consecutive integers
/// starting at the scale minimum and labels are unique.
struct RatingScale {
  Dimension dimension = Dimension::severity;
  std::vector<ScaleLevel> levels;

  int min_rank() const;
  int max_rank() const;
  bool contains(int rank) const { return rank >= min_rank() && rank <= max_rank(); }
  std::optional<int> rank_for_label(std::string_view label) const;
  const ScaleLevel* level(int rank) const;
};

/// The 1..4 rating matrix used when a model declares no custom scales.
RatingScale default_scale(Dimension dimension);

/// Per-dimension rank reductions an action applies to one failure mode.
struct MitigationEffect {
  int severity = 0;
  int occurrence = 0;
  int detectability = 0;

  int delta(Dimension dimension) const;
  bool is_zero() const { return severity == 0 && occurrence == 0 && detectability == 0; }
};

struct Component {
  std::string id;
  std::string name;
  std::string function;
  /// Threshold copied to failure modes of this component that declare none.
  std::optional<int> default_critical_threshold;
};

struct FailureMode {
  std::string id;
  std::string component_id;
  std::string description;
  std::string causes;
  std::string effects;
  Rank severity{1};
  Rank occurrence{1};
  Rank detectability{1};
  int critical_threshold = 1;
  std::vector<std::string> recommended_action_ids;
  /// Alternative-action groups (relation type 3). Recorded for the data
  /// model; the solver rejects models containing them.
  std::vector<std::vector<std::string>> alternative_groups;

  Rank rank(Dimension dimension) const;
};

struct PreventiveAction {
  std::string id;
  std::string description;
  Rational cost;
  std::map<std::string, MitigationEffect> mitigations;  // failure mode id -> effect
};

struct FmecaModel {
  std::array<RatingScale, 3> scales = {default_scale(Dimension::severity),
                                       default_scale(Dimension::occurrence),
                                       default_scale(Dimension::detectability)};
  std::vector<Component> components;
  std::vector<FailureMode> failure_modes;
  std::vector<PreventiveAction> actions;
  Rational budget;

  const RatingScale& scale(Dimension dimension) const;
  RatingScale& scale(Dimension dimension);
  const Component* component(std::string_view id) const;
  const FailureMode* failure_mode(std::string_view id) const;
  const PreventiveAction* action(std::string_view id) const;

  /// Criticality range endpoints implied by the scales.
  int min_criticality() const;
  int max_criticality() const;

  /// Failure modes recommending the given action.
  std::vector<std::string> recommending_failure_modes(std::string_view action_id) const;
};

/// Lexicographic solution quality: fewer threshold violations first, then
/// lower total excess over thresholds, then lower cost.
struct Objective {
  int violations = 0;
  int excess = 0;
  Rational cost;

  auto operator<=>(const Objective&) const = default;
};

struct FailureModeOutcome {
  std::string failure_mode_id;
  int initial_criticality = 0;
  int residual_criticality = 0;
  int critical_threshold = 0;
  bool critical = false;
  std::vector<std::string> selected_action_ids;  // selected among recommended, sorted
};

/// A selection of preventive actions plus everything derived from it.
struct Configuration {
  std::set<std::string> selected_action_ids;
  Rational total_cost;
  std::vector<FailureModeOutcome> outcomes;  // sorted by failure mode id
  Objective objective;

  bool feasible(const Rational& budget) const {
    return objective.violations == 0 && !(budget < total_cost);
  }
};

}  // namespace fmeca
