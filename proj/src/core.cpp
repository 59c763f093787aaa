#include "fmeca/core.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace fmeca {

int criticality(Rank severity, Rank occurrence, Rank detectability) {
  return severity.value * occurrence.value * detectability.value;
}

int criticality(const FmecaModel& model, Rank severity, Rank occurrence, Rank detectability) {
  const Rank ranks[3] = {severity, occurrence, detectability};
  for (Dimension d : kDimensions) {
    const RatingScale& scale = model.scale(d);
    int value = ranks[static_cast<size_t>(d)].value;
    if (!scale.contains(value)) {
      throw std::out_of_range(std::string(dimension_name(d)) + " rank " +
                              std::to_string(value) + " outside scale [" +
                              std::to_string(scale.min_rank()) + "," +
                              std::to_string(scale.max_rank()) + "]");
    }
  }
  return criticality(severity, occurrence, detectability);
}

int initial_criticality(const FailureMode& fm) {
  return criticality(fm.severity, fm.occurrence, fm.detectability);
}

Rank RankTriple::rank(Dimension dimension) const {
  switch (dimension) {
    case Dimension::severity: return severity;
    case Dimension::occurrence: return occurrence;
    case Dimension::detectability: return detectability;
  }
  throw std::logic_error("unknown dimension");
}

RankTriple residual_ranks(const FmecaModel& model, const FailureMode& fm,
                          const std::set<std::string>& selected_action_ids) {
  RankTriple out{fm.severity, fm.occurrence, fm.detectability};
  for (Dimension d : kDimensions) {
    int initial = fm.rank(d).value;
    int reduction = 0;
    for (const auto& action_id : selected_action_ids) {
      const PreventiveAction* action = model.action(action_id);
      if (action == nullptr) continue;  // unknown ids are ignored here, flagged by validate
      auto it = action->mitigations.find(fm.id);
      if (it != action->mitigations.end()) reduction += it->second.delta(d);
    }
    int residual = std::clamp(initial - reduction, model.scale(d).min_rank(), initial);
    switch (d) {
      case Dimension::severity: out.severity = Rank{residual}; break;
      case Dimension::occurrence: out.occurrence = Rank{residual}; break;
      case Dimension::detectability: out.detectability = Rank{residual}; break;
    }
  }
  return out;
}

int residual_criticality(const FmecaModel& model, const FailureMode& fm,
                         const std::set<std::string>& selected_action_ids) {
  RankTriple residual = residual_ranks(model, fm, selected_action_ids);
  return criticality(residual.severity, residual.occurrence, residual.detectability);
}

bool is_critical(const FmecaModel& model, const FailureMode& fm,
                 const std::set<std::string>& selected_action_ids) {
  return residual_criticality(model, fm, selected_action_ids) > fm.critical_threshold;
}

Rational total_cost(const FmecaModel& model, const std::set<std::string>& selected_action_ids) {
  Rational total;
  for (const auto& id : selected_action_ids) {
    const PreventiveAction* action = model.action(id);
    if (action == nullptr) {
      throw std::invalid_argument("selected action \"" + id + "\" does not exist in the model");
    }
    total += action->cost;
  }
  return total;
}

Objective objective(const FmecaModel& model, const std::set<std::string>& selected_action_ids) {
  Objective obj;
  obj.cost = total_cost(model, selected_action_ids);
  for (const auto& fm : model.failure_modes) {
    int residual = residual_criticality(model, fm, selected_action_ids);
    if (residual > fm.critical_threshold) {
      obj.violations += 1;
      obj.excess += residual - fm.critical_threshold;
    }
  }
  return obj;
}

Configuration evaluate(const FmecaModel& model, const std::set<std::string>& selected_action_ids) {
  Configuration config;
  config.selected_action_ids = selected_action_ids;
  config.total_cost = total_cost(model, selected_action_ids);

  std::vector<const FailureMode*> ordered;
  ordered.reserve(model.failure_modes.size());
  for (const auto& fm : model.failure_modes) ordered.push_back(&fm);
  std::sort(ordered.begin(), ordered.end(),
            [](const FailureMode* a, const FailureMode* b) { return a->id < b->id; });

  for (const FailureMode* fm : ordered) {
    FailureModeOutcome outcome;
    outcome.failure_mode_id = fm->id;
    outcome.initial_criticality = initial_criticality(*fm);
    outcome.residual_criticality = residual_criticality(model, *fm, selected_action_ids);
    outcome.critical_threshold = fm->critical_threshold;
    outcome.critical = outcome.residual_criticality > fm->critical_threshold;
    for (const auto& action_id : fm->recommended_action_ids) {
      if (selected_action_ids.count(action_id) > 0) {
        outcome.selected_action_ids.push_back(action_id);
      }
    }
    std::sort(outcome.selected_action_ids.begin(), outcome.selected_action_ids.end());
    if (outcome.critical) {
      config.objective.violations += 1;
      config.objective.excess += outcome.residual_criticality - fm->critical_threshold;
    }
    config.outcomes.push_back(std::move(outcome));
  }
  config.objective.cost = config.total_cost;
  return config;
}

namespace {

void add(std::vector<Diagnostic>& out, DiagnosticLevel level, std::string code,
         std::string message) {
  out.push_back(Diagnostic{level, std::move(code), std::move(message), std::nullopt});
}

void check_scale(std::vector<Diagnostic>& out, const RatingScale& scale) {
  std::string name(dimension_name(scale.dimension));
  if (scale.levels.empty()) {
    add(out, DiagnosticLevel::error, "scale-malformed", name + " scale has no levels");
    return;
  }
  if (scale.levels.front().rank < 1) {
    add(out, DiagnosticLevel::error, "scale-malformed",
        name + " scale must start at rank 1 or above");
  }
  std::set<std::string> labels;
  for (size_t i = 0; i < scale.levels.size(); ++i) {
    const ScaleLevel& level = scale.levels[i];
    if (i > 0 && level.rank != scale.levels[i - 1].rank + 1) {
      add(out, DiagnosticLevel::error, "scale-malformed",
          name + " scale ranks must be consecutive integers");
    }
    if (!labels.insert(level.label).second) {
      add(out, DiagnosticLevel::error, "duplicate-label",
          name + " scale label \"" + level.label + "\" appears more than once");
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const FmecaModel& model) {
  std::vector<Diagnostic> out;

  for (Dimension d : kDimensions) check_scale(out, model.scale(d));

  std::set<std::string> component_ids, failure_mode_ids, action_ids;
  for (const auto& c : model.components) {
    if (!component_ids.insert(c.id).second) {
      add(out, DiagnosticLevel::error, "duplicate-id",
          "component id \"" + c.id + "\" appears more than once");
    }
  }
  for (const auto& fm : model.failure_modes) {
    if (!failure_mode_ids.insert(fm.id).second) {
      add(out, DiagnosticLevel::error, "duplicate-id",
          "failure mode id \"" + fm.id + "\" appears more than once");
    }
  }
  for (const auto& a : model.actions) {
    if (!action_ids.insert(a.id).second) {
      add(out, DiagnosticLevel::error, "duplicate-id",
          "action id \"" + a.id + "\" appears more than once");
    }
  }

  if (model.failure_modes.empty()) {
    add(out, DiagnosticLevel::warning, "empty-failure-modes",
        "model has no failure modes; there is nothing to optimize");
  }
  if (model.budget.is_negative()) {
    add(out, DiagnosticLevel::error, "negative-budget",
        "budget " + model.budget.str() + " is negative");
  }

  for (const auto& fm : model.failure_modes) {
    if (!fm.component_id.empty() && component_ids.count(fm.component_id) == 0) {
      add(out, DiagnosticLevel::error, "unknown-component",
          "failure mode \"" + fm.id + "\" references unknown component \"" +
              fm.component_id + "\"");
    }
    for (Dimension d : kDimensions) {
      const RatingScale& scale = model.scale(d);
      int value = fm.rank(d).value;
      if (!scale.contains(value)) {
        add(out, DiagnosticLevel::error, "rank-out-of-scale",
            "failure mode \"" + fm.id + "\": " + std::string(dimension_name(d)) + " rank " +
                std::to_string(value) + " outside scale [" + std::to_string(scale.min_rank()) +
                "," + std::to_string(scale.max_rank()) + "]");
      }
    }
    if (fm.critical_threshold < 1) {
      add(out, DiagnosticLevel::error, "threshold-not-positive",
          "failure mode \"" + fm.id + "\": critical threshold must be a positive integer");
    } else if (fm.critical_threshold < model.min_criticality() ||
               fm.critical_threshold > model.max_criticality()) {
      add(out, DiagnosticLevel::warning, "threshold-outside-range",
          "failure mode \"" + fm.id + "\": critical threshold " +
              std::to_string(fm.critical_threshold) + " lies outside the criticality range [" +
              std::to_string(model.min_criticality()) + "," +
              std::to_string(model.max_criticality()) + "]");
    }
    for (const auto& action_id : fm.recommended_action_ids) {
      if (action_ids.count(action_id) == 0) {
        add(out, DiagnosticLevel::error, "unknown-action",
            "failure mode \"" + fm.id + "\" recommends unknown action \"" + action_id + "\"");
      }
    }
    if (!fm.alternative_groups.empty()) {
      add(out, DiagnosticLevel::error, "relation-type-3-unsupported",
          "failure mode \"" + fm.id +
              "\" declares alternative-action groups; the solver does not support them");
      for (const auto& group : fm.alternative_groups) {
        for (const auto& action_id : group) {
          if (action_ids.count(action_id) == 0) {
            add(out, DiagnosticLevel::error, "unknown-action",
                "failure mode \"" + fm.id + "\" groups unknown action \"" + action_id + "\"");
          }
        }
      }
    }
    if (initial_criticality(fm) > fm.critical_threshold && fm.recommended_action_ids.empty()) {
      add(out, DiagnosticLevel::warning, "missing-recommended-actions",
          "failure mode \"" + fm.id +
              "\" is initially critical but recommends no preventive action");
    }
  }

  for (const auto& action : model.actions) {
    if (action.cost.is_negative()) {
      add(out, DiagnosticLevel::error, "negative-cost",
          "action \"" + action.id + "\": cost " + action.cost.str() + " is negative");
    }
    std::set<std::string> touched;
    for (const auto& [fm_id, effect] : action.mitigations) {
      touched.insert(fm_id);
      const FailureMode* fm = model.failure_mode(fm_id);
      if (fm == nullptr) {
        add(out, DiagnosticLevel::error, "unknown-failure-mode",
            "action \"" + action.id + "\" mitigates unknown failure mode \"" + fm_id + "\"");
        continue;
      }
      bool recommended =
          std::find(fm->recommended_action_ids.begin(), fm->recommended_action_ids.end(),
                    action.id) != fm->recommended_action_ids.end();
      if (!recommended) {
        add(out, DiagnosticLevel::error, "mitigation-not-recommended",
            "action \"" + action.id + "\" mitigates failure mode \"" + fm_id +
                "\" which does not recommend it");
      }
      if (effect.severity < 0 || effect.occurrence < 0 || effect.detectability < 0) {
        add(out, DiagnosticLevel::error, "negative-delta",
            "action \"" + action.id + "\": mitigation for \"" + fm_id +
                "\" has a negative rank reduction");
      }
      if (effect.is_zero()) {
        add(out, DiagnosticLevel::warning, "zero-effect-mitigation",
            "action \"" + action.id + "\": mitigation for \"" + fm_id + "\" has no effect");
      }
    }
    for (const auto& fm_id : model.recommending_failure_modes(action.id)) {
      touched.insert(fm_id);
      if (action.mitigations.find(fm_id) == action.mitigations.end()) {
        add(out, DiagnosticLevel::warning, "zero-effect-mitigation",
            "action \"" + action.id + "\" is recommended for \"" + fm_id +
                "\" but defines no mitigation for it");
      }
    }
    if (touched.size() > 1) {
      std::string joined;
      for (const auto& id : touched) {
        if (!joined.empty()) joined += ", ";
        joined += id;
      }
      add(out, DiagnosticLevel::error, "relation-type-4-unsupported",
          "action \"" + action.id + "\" targets several failure modes (" + joined +
              "); the solver does not support multi-target actions");
    }
  }

  return out;
}

}  // namespace fmeca
