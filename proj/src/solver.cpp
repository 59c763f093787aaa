#include "fmeca/solver.hpp"

#include <algorithm>
#include <stdexcept>

namespace fmeca::amas {

std::string_view feedback_kind_name(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::select_more: return "up";
    case FeedbackKind::select_less: return "down";
    case FeedbackKind::selection_good: return "good";
  }
  throw std::logic_error("unknown feedback kind");
}

std::string AgentRef::str() const {
  switch (type) {
    case Type::failure_mode: return "fm:" + id;
    case Type::action: return "act:" + id;
    case Type::quality: return "quality";
  }
  throw std::logic_error("unknown agent type");
}

AgentRef failure_mode_agent(std::string id) {
  return AgentRef{AgentRef::Type::failure_mode, std::move(id)};
}

AgentRef action_agent(std::string id) { return AgentRef{AgentRef::Type::action, std::move(id)}; }

AgentRef quality_agent() { return AgentRef{AgentRef::Type::quality, ""}; }

std::set<std::string> SimulationState::selected_action_ids() const {
  std::set<std::string> out;
  for (const auto& [id, agent] : failure_modes) {
    out.insert(agent.selected.begin(), agent.selected.end());
  }
  return out;
}

SimulationState init_state(const FmecaModel& model, const SolverConfig& config) {
  SimulationState state;
  state.quality.budget = model.budget;
  for (const auto& action : model.actions) {
    state.actions.emplace(action.id, ActionAgent{action.id, {}, {}, 0, 0});
  }
  for (const auto& fm : model.failure_modes) {
    FailureModeAgent agent;
    agent.failure_mode_id = fm.id;
    if (config.initial_selection == SolverConfig::InitialSelection::all_recommended) {
      for (const auto& action_id : fm.recommended_action_ids) {
        agent.selected.insert(action_id);
        state.actions.at(action_id).selected_by.insert(fm.id);
      }
    }
    state.failure_modes.emplace(fm.id, std::move(agent));
  }
  state.quality.last_total_cost = total_cost(model, state.selected_action_ids());
  return state;
}

Rational agent_criticality(const FailureModeAgent& agent, const FmecaModel& model) {
  const FailureMode* fm = model.failure_mode(agent.failure_mode_id);
  if (fm == nullptr) throw std::invalid_argument("agent for unknown failure mode");
  if (residual_criticality(model, *fm, agent.selected) <= fm->critical_threshold) {
    return Rational(0);
  }
  return Rational(100, static_cast<std::int64_t>(agent.selected.size()) + 1);
}

Rational agent_criticality(const ActionAgent& agent) {
  return Rational(100, static_cast<std::int64_t>(agent.selected_by.size()) + 1);
}

Rational agent_criticality(const QualityAgent& agent) {
  if (!(agent.budget < agent.last_total_cost)) return Rational(0);
  if (agent.budget.is_zero()) return Rational(100);
  Rational overrun = (agent.last_total_cost - agent.budget) / agent.budget;
  return Rational::min(Rational(1), overrun) * Rational(100);
}

DetectionResult detect_bad_safety_criticality(FailureModeAgent& agent, const FmecaModel& model,
                                              int round) {
  const FailureMode* fm = model.failure_mode(agent.failure_mode_id);
  if (fm == nullptr) throw std::invalid_argument("agent for unknown failure mode");

  std::set<std::string> recommended(fm->recommended_action_ids.begin(),
                                    fm->recommended_action_ids.end());
  DetectionResult result;
  int residual = residual_criticality(model, *fm, agent.selected);
  if (residual > fm->critical_threshold) {
    result.ncs_detected = true;
    std::vector<std::string> unselected;
    for (const auto& id : recommended) {
      if (agent.selected.count(id) == 0) unselected.push_back(id);
    }
    if (unselected.empty()) {
      result.unresolvable = true;
      agent.annoyance += 1;
    } else {
      for (const auto& id : unselected) {
        result.feedbacks.push_back(Feedback{FeedbackKind::select_more,
                                            failure_mode_agent(fm->id), action_agent(id), fm->id,
                                            round, {}});
      }
    }
  } else {
    agent.annoyance = 0;
    for (const auto& id : recommended) {
      result.feedbacks.push_back(Feedback{FeedbackKind::selection_good,
                                          failure_mode_agent(fm->id), action_agent(id), fm->id,
                                          round, {}});
    }
  }
  return result;
}

DetectionResult detect_bad_total_cost(QualityAgent& agent, const SimulationState& state,
                                      const FmecaModel& model, int round) {
  std::set<std::string> selected = state.selected_action_ids();
  agent.last_total_cost = total_cost(model, selected);

  DetectionResult result;
  FeedbackKind kind = FeedbackKind::selection_good;
  if (agent.budget < agent.last_total_cost) {
    result.ncs_detected = true;
    agent.annoyance += 1;
    kind = FeedbackKind::select_less;
  } else {
    agent.annoyance = 0;
  }
  for (const auto& id : selected) {
    result.feedbacks.push_back(
        Feedback{kind, quality_agent(), action_agent(id), std::nullopt, round, {}});
  }
  return result;
}

namespace {

struct Candidate {
  std::string id;
  Rational criticality;
  Rational cost;
};

/// Most-critical ordering: higher agent-criticality, then lower cost, then
/// lexicographic id.
bool more_critical(const Candidate& a, const Candidate& b) {
  if (a.criticality != b.criticality) return a.criticality > b.criticality;
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.id < b.id;
}

/// Deselection ordering: higher cost, then higher agent-criticality, then
/// lexicographic id.
bool better_removal(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost > b.cost;
  if (a.criticality != b.criticality) return a.criticality > b.criticality;
  return a.id < b.id;
}

Candidate make_candidate(const std::string& action_id, const SimulationState& state,
                         const FmecaModel& model) {
  const PreventiveAction* action = model.action(action_id);
  if (action == nullptr) throw std::invalid_argument("unknown action \"" + action_id + "\"");
  return Candidate{action_id, agent_criticality(state.actions.at(action_id)), action->cost};
}

bool in_trail(const std::vector<std::string>& trail, const std::string& id) {
  return std::find(trail.begin(), trail.end(), id) != trail.end();
}

/// An action is safely removable when every failure mode currently
/// selecting it stays at or below its threshold without it.
bool deselection_safe(const std::string& action_id, const SimulationState& state,
                      const FmecaModel& model) {
  const ActionAgent& agent = state.actions.at(action_id);
  for (const auto& fm_id : agent.selected_by) {
    const FailureMode* fm = model.failure_mode(fm_id);
    if (fm == nullptr) continue;
    std::set<std::string> without = state.failure_modes.at(fm_id).selected;
    without.erase(action_id);
    if (residual_criticality(model, *fm, without) > fm->critical_threshold) return false;
  }
  return true;
}

RouteDecision remove_all_relations(const ActionAgent& agent) {
  RouteDecision decision;
  decision.kind = RouteDecision::Kind::remove;
  for (const auto& fm_id : agent.selected_by) {
    decision.relations.emplace_back(fm_id, agent.action_id);
  }
  return decision;
}

RouteDecision route_select_more(ActionAgent& agent, const Feedback& feedback,
                                const SimulationState& state, const FmecaModel& model,
                                const SolverConfig& config) {
  if (!feedback.subject) throw std::invalid_argument("select-more feedback without a subject");
  const FailureMode* fm = model.failure_mode(*feedback.subject);
  if (fm == nullptr) throw std::invalid_argument("select-more feedback for unknown failure mode");

  std::set<std::string> neighbourhood(fm->recommended_action_ids.begin(),
                                      fm->recommended_action_ids.end());
  neighbourhood.insert(agent.action_id);

  std::vector<Candidate> candidates;
  for (const auto& id : neighbourhood) {
    if (id != agent.action_id && in_trail(feedback.hop_trail, id)) continue;
    candidates.push_back(make_candidate(id, state, model));
  }

  if (candidates.size() == 1) {
    // Every neighbour has been visited already; this agent is the end of
    // the line.
    RouteDecision decision;
    if (agent.annoyance_select_more >= config.reorganization_annoyance) {
      decision.kind = RouteDecision::Kind::add;
      decision.relations.emplace_back(fm->id, agent.action_id);
    } else {
      agent.annoyance_select_more += 1;
      decision.kind = RouteDecision::Kind::noop;
      decision.dead_end = true;
    }
    return decision;
  }

  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (more_critical(c, *best)) best = &c;
  }

  RouteDecision decision;
  if (best->id == agent.action_id) {
    decision.kind = RouteDecision::Kind::add;
    decision.relations.emplace_back(fm->id, agent.action_id);
  } else {
    decision.kind = RouteDecision::Kind::forward;
    decision.forward_to = best->id;
  }
  return decision;
}

RouteDecision route_select_less(ActionAgent& agent, const Feedback& feedback,
                                const SimulationState& state, const FmecaModel& model) {
  std::vector<Candidate> candidates;
  for (const auto& id : state.selected_action_ids()) {
    if (id != agent.action_id && in_trail(feedback.hop_trail, id)) continue;
    if (!deselection_safe(id, state, model)) continue;
    candidates.push_back(make_candidate(id, state, model));
  }

  RouteDecision decision;
  if (candidates.empty()) {
    agent.annoyance_select_less += 1;
    decision.kind = RouteDecision::Kind::noop;
    decision.dead_end = true;
    return decision;
  }

  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (better_removal(c, *best)) best = &c;
  }
  if (best->id == agent.action_id) {
    return remove_all_relations(agent);
  }
  decision.kind = RouteDecision::Kind::forward;
  decision.forward_to = best->id;
  return decision;
}

/// Source-text routing for select-less, kept for comparison runs: the most
/// critical agent forwards, everyone else removes itself.
RouteDecision route_select_less_literal(ActionAgent& agent, const Feedback& feedback,
                                        const SimulationState& state, const FmecaModel& model,
                                        const SolverConfig& config) {
  std::vector<Candidate> candidates;
  for (const auto& id : state.selected_action_ids()) {
    if (id != agent.action_id && in_trail(feedback.hop_trail, id)) continue;
    candidates.push_back(make_candidate(id, state, model));
  }

  RouteDecision decision;
  if (candidates.size() <= 1) {
    if (agent.selected_by.empty()) {
      decision.kind = RouteDecision::Kind::noop;
      return decision;
    }
    if (agent.annoyance_select_less >= config.reorganization_annoyance) {
      return remove_all_relations(agent);
    }
    agent.annoyance_select_less += 1;
    decision.kind = RouteDecision::Kind::noop;
    decision.dead_end = true;
    return decision;
  }

  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (more_critical(c, *best)) best = &c;
  }
  if (best->id == agent.action_id) {
    const Candidate* next = nullptr;
    for (const auto& c : candidates) {
      if (c.id == agent.action_id) continue;
      if (next == nullptr || more_critical(c, *next)) next = &c;
    }
    decision.kind = RouteDecision::Kind::forward;
    decision.forward_to = next->id;
    return decision;
  }
  return remove_all_relations(agent);
}

}  // namespace

RouteDecision route_feedback(ActionAgent& agent, const Feedback& feedback,
                             const SimulationState& state, const FmecaModel& model,
                             const SolverConfig& config) {
  switch (feedback.kind) {
    case FeedbackKind::selection_good: {
      if (feedback.source.type == AgentRef::Type::quality) {
        agent.annoyance_select_less = 0;
      } else {
        agent.annoyance_select_more = 0;
      }
      return RouteDecision{};
    }
    case FeedbackKind::select_more:
      return route_select_more(agent, feedback, state, model, config);
    case FeedbackKind::select_less:
      if (config.literal_select_less) {
        return route_select_less_literal(agent, feedback, state, model, config);
      }
      return route_select_less(agent, feedback, state, model);
  }
  throw std::logic_error("unknown feedback kind");
}

namespace {

TraceEvent& append_event(SimulationState& state, int round, std::string agent,
                         std::string event) {
  state.trace.push_back(TraceEvent{round, std::move(agent), std::move(event),
                                   nlohmann::ordered_json::object()});
  return state.trace.back();
}

void append_state_event(SimulationState& state, const FmecaModel& model, int round) {
  TraceEvent& ev = append_event(state, round, "sim", "state");
  auto selections = nlohmann::ordered_json::array();
  for (const auto& [fm_id, agent] : state.failure_modes) {
    for (const auto& action_id : agent.selected) {
      selections.push_back({fm_id, action_id});
    }
  }
  auto selected_by = nlohmann::ordered_json::array();
  for (const auto& [action_id, agent] : state.actions) {
    for (const auto& fm_id : agent.selected_by) {
      selected_by.push_back({action_id, fm_id});
    }
  }
  ev.payload["selections"] = std::move(selections);
  ev.payload["selected_by"] = std::move(selected_by);
  ev.payload["total_cost"] = total_cost(model, state.selected_action_ids()).str();

  auto criticality = nlohmann::ordered_json::object();
  for (const auto& [fm_id, agent] : state.failure_modes) {
    criticality[failure_mode_agent(fm_id).str()] = agent_criticality(agent, model).str();
  }
  for (const auto& [action_id, agent] : state.actions) {
    criticality[action_agent(action_id).str()] = agent_criticality(agent).str();
  }
  QualityAgent quality_now = state.quality;
  quality_now.last_total_cost = total_cost(model, state.selected_action_ids());
  criticality["quality"] = agent_criticality(quality_now).str();
  ev.payload["criticality"] = std::move(criticality);
}

void trace_feedback(SimulationState& state, const Feedback& feedback) {
  TraceEvent& ev = append_event(state, feedback.round, feedback.source.str(), "feedback");
  ev.payload["kind"] = std::string(feedback_kind_name(feedback.kind));
  ev.payload["target"] = feedback.target.str();
  if (feedback.subject) ev.payload["subject"] = *feedback.subject;
}

struct ChainResult {
  std::set<std::pair<std::string, std::string>> adds;
  std::set<std::pair<std::string, std::string>> removes;
};

void process_chain(Feedback feedback, SimulationState& state, const FmecaModel& model,
                   const SolverConfig& config, ChainResult& intents) {
  while (true) {
    ActionAgent& agent = state.actions.at(feedback.target.id);
    RouteDecision decision = route_feedback(agent, feedback, state, model, config);
    switch (decision.kind) {
      case RouteDecision::Kind::add:
        for (const auto& relation : decision.relations) intents.adds.insert(relation);
        return;
      case RouteDecision::Kind::remove:
        for (const auto& relation : decision.relations) intents.removes.insert(relation);
        return;
      case RouteDecision::Kind::forward: {
        TraceEvent& ev = append_event(state, feedback.round, feedback.target.str(), "forward");
        ev.payload["kind"] = std::string(feedback_kind_name(feedback.kind));
        ev.payload["to"] = action_agent(decision.forward_to).str();
        if (feedback.subject) ev.payload["subject"] = *feedback.subject;
        feedback.hop_trail.push_back(agent.action_id);
        ev.payload["trail"] = feedback.hop_trail;
        feedback.target = action_agent(decision.forward_to);
        break;
      }
      case RouteDecision::Kind::noop: {
        if (decision.dead_end) {
          TraceEvent& ev =
              append_event(state, feedback.round, feedback.target.str(), "unresolvable");
          ev.payload["kind"] =
              feedback.kind == FeedbackKind::select_less ? "bad-cost" : "bad-safety";
          ev.payload["annoyance"] = feedback.kind == FeedbackKind::select_less
                                        ? agent.annoyance_select_less
                                        : agent.annoyance_select_more;
        }
        return;
      }
    }
  }
}

}  // namespace

StepOutcome step(SimulationState& state, const FmecaModel& model, const SolverConfig& config) {
  const int round = state.round + 1;
  StepOutcome outcome;
  std::vector<Feedback> outbound;

  // Phase 1: the quality agent inspects the total cost.
  DetectionResult quality_detection = detect_bad_total_cost(state.quality, state, model, round);
  if (quality_detection.ncs_detected) {
    outcome.ncs_count += 1;
    TraceEvent& ev = append_event(state, round, "quality", "ncs");
    ev.payload["kind"] = "bad-cost";
    ev.payload["total_cost"] = state.quality.last_total_cost.str();
    ev.payload["budget"] = state.quality.budget.str();
  }
  for (auto& f : quality_detection.feedbacks) outbound.push_back(std::move(f));

  // Phase 2: failure-mode agents inspect their residual criticality.
  for (auto& [fm_id, agent] : state.failure_modes) {
    DetectionResult detection = detect_bad_safety_criticality(agent, model, round);
    if (detection.ncs_detected) {
      outcome.ncs_count += 1;
      const FailureMode* fm = model.failure_mode(fm_id);
      TraceEvent& ev = append_event(state, round, failure_mode_agent(fm_id).str(), "ncs");
      ev.payload["kind"] = "bad-safety";
      ev.payload["residual"] = residual_criticality(model, *fm, agent.selected);
      ev.payload["threshold"] = fm->critical_threshold;
      if (detection.unresolvable) {
        TraceEvent& uev =
            append_event(state, round, failure_mode_agent(fm_id).str(), "unresolvable");
        uev.payload["kind"] = "bad-safety";
        uev.payload["annoyance"] = agent.annoyance;
      }
    }
    for (auto& f : detection.feedbacks) outbound.push_back(std::move(f));
  }

  // Phase 3: deterministic delivery, ordered by source then target.
  std::sort(outbound.begin(), outbound.end(), [](const Feedback& a, const Feedback& b) {
    if (a.source != b.source) return a.source < b.source;
    return a.target < b.target;
  });
  for (const auto& f : outbound) {
    trace_feedback(state, f);
    state.actions.at(f.target.id).inbox.push_back(f);
  }

  // Phase 4: selection-good receipts reset annoyance before anything else.
  for (auto& [action_id, agent] : state.actions) {
    for (const auto& f : agent.inbox) {
      if (f.kind == FeedbackKind::selection_good) {
        route_feedback(agent, f, state, model, config);
      }
    }
  }

  // Phases 4-5: cooperative routing, forwards chased to a fixpoint. The
  // criticality snapshot is stable within the round because intents are
  // applied only at the end.
  std::vector<Feedback> ups, downs;
  for (auto& [action_id, agent] : state.actions) {
    for (const auto& f : agent.inbox) {
      if (f.kind == FeedbackKind::select_more) ups.push_back(f);
      if (f.kind == FeedbackKind::select_less) downs.push_back(f);
    }
  }

  ChainResult intents;
  if (config.safety_precedence) {
    std::map<std::string, Rational> source_criticality;
    for (const auto& f : ups) {
      if (source_criticality.count(f.source.id) == 0) {
        source_criticality.emplace(f.source.id,
                                   agent_criticality(state.failure_modes.at(f.source.id), model));
      }
    }
    std::sort(ups.begin(), ups.end(), [&source_criticality](const Feedback& a, const Feedback& b) {
      const Rational& ca = source_criticality.at(a.source.id);
      const Rational& cb = source_criticality.at(b.source.id);
      if (ca != cb) return cb < ca;  // most critical source first
      if (a.source.id != b.source.id) return a.source.id < b.source.id;
      return a.target.id < b.target.id;
    });
    std::sort(downs.begin(), downs.end(),
              [](const Feedback& a, const Feedback& b) { return a.target.id < b.target.id; });
    for (const auto& f : ups) process_chain(f, state, model, config, intents);
    for (const auto& f : downs) process_chain(f, state, model, config, intents);
  } else {
    std::vector<Feedback> merged;
    merged.reserve(ups.size() + downs.size());
    for (const auto& f : ups) merged.push_back(f);
    for (const auto& f : downs) merged.push_back(f);
    std::sort(merged.begin(), merged.end(), [](const Feedback& a, const Feedback& b) {
      if (a.source != b.source) return a.source < b.source;
      return a.target < b.target;
    });
    for (const auto& f : merged) process_chain(f, state, model, config, intents);
  }

  // Phase 6: atomic application. A relation appearing on both sides
  // resolves to the add; the applied sets stay disjoint.
  for (const auto& relation : intents.adds) {
    auto it = intents.removes.find(relation);
    if (it != intents.removes.end()) {
      intents.removes.erase(it);
      TraceEvent& ev = append_event(state, round, "sim", "conflict");
      ev.payload["failure_mode"] = relation.first;
      ev.payload["action"] = relation.second;
      ev.payload["resolved"] = "add";
    }
  }
  for (const auto& [fm_id, action_id] : intents.adds) {
    FailureModeAgent& fm_agent = state.failure_modes.at(fm_id);
    if (fm_agent.selected.count(action_id) > 0) continue;  // already selected, no mutation
    fm_agent.selected.insert(action_id);
    state.actions.at(action_id).selected_by.insert(fm_id);
    outcome.mutations += 1;
    TraceEvent& ev = append_event(state, round, action_agent(action_id).str(), "add");
    ev.payload["failure_mode"] = fm_id;
    ev.payload["action"] = action_id;
  }
  for (const auto& [fm_id, action_id] : intents.removes) {
    FailureModeAgent& fm_agent = state.failure_modes.at(fm_id);
    if (fm_agent.selected.count(action_id) == 0) continue;
    fm_agent.selected.erase(action_id);
    state.actions.at(action_id).selected_by.erase(fm_id);
    outcome.mutations += 1;
    TraceEvent& ev = append_event(state, round, action_agent(action_id).str(), "remove");
    ev.payload["failure_mode"] = fm_id;
    ev.payload["action"] = action_id;
  }

  // Phase 7: clear inboxes, log the end-of-round state, advance time.
  for (auto& [action_id, agent] : state.actions) agent.inbox.clear();
  append_state_event(state, model, round);
  state.round = round;
  return outcome;
}

SolverResult run(const FmecaModel& model, const SolverConfig& config) {
  std::vector<Diagnostic> diagnostics = validate(model);
  if (has_errors(diagnostics)) {
    std::string message = "model failed validation";
    for (const auto& d : diagnostics) {
      if (d.level == DiagnosticLevel::error) {
        message += ": " + d.message;
        break;
      }
    }
    throw std::invalid_argument(message);
  }

  SimulationState state = init_state(model, config);
  append_state_event(state, model, 0);

  SolverResult result;
  Configuration current = evaluate(model, state.selected_action_ids());
  result.best = current;
  if (!(model.budget < current.total_cost)) result.best_within_budget = current;

  auto append_best = [&state, &result](int round) {
    TraceEvent& ev = append_event(state, round, "sim", "best");
    ev.payload["violations"] = result.best.objective.violations;
    ev.payload["excess"] = result.best.objective.excess;
    ev.payload["cost"] = result.best.objective.cost.str();
  };
  append_best(0);

  int quiet = 0;
  int stalled = 0;
  const int stall_limit = std::max(config.quiescence_window, config.reorganization_annoyance + 2);

  for (int t = 1; t <= config.max_rounds; ++t) {
    StepOutcome outcome = step(state, model, config);
    result.rounds_used = t;

    current = evaluate(model, state.selected_action_ids());
    if (current.objective < result.best.objective) result.best = current;
    if (!(model.budget < current.total_cost)) {
      if (!result.best_within_budget ||
          current.objective < result.best_within_budget->objective) {
        result.best_within_budget = current;
      }
    }
    append_best(t);

    if (outcome.ncs_count == 0 && outcome.mutations == 0) {
      quiet += 1;
    } else {
      quiet = 0;
    }
    if (outcome.mutations == 0 && outcome.ncs_count > 0) {
      stalled += 1;
    } else {
      stalled = 0;
    }
    if (quiet >= config.quiescence_window) {
      result.converged = true;
      break;
    }
    // A frozen graph with persistent NCS repeats forever once annoyance has
    // passed every gate; stop instead of burning rounds.
    if (stalled >= stall_limit) break;
  }

  result.final = current;
  for (const auto& [fm_id, agent] : state.failure_modes) {
    const FailureMode* fm = model.failure_mode(fm_id);
    if (residual_criticality(model, *fm, agent.selected) > fm->critical_threshold) {
      result.unresolved.violated_failure_modes.push_back(fm_id);
    }
  }
  result.unresolved.bad_total_cost = model.budget < result.final.total_cost;
  bool feasible_seen = result.best_within_budget &&
                       result.best_within_budget->objective.violations == 0;
  result.unresolved.budget_infeasible = result.best.objective.violations == 0 &&
                                        model.budget < result.best.total_cost && !feasible_seen;
  result.trace = std::move(state.trace);
  return result;
}

}  // namespace fmeca::amas
