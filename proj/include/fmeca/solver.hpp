#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fmeca/core.hpp"
#include "fmeca/trace.hpp"

namespace fmeca::amas {

enum class FeedbackKind { select_more, select_less, selection_good };

std::string_view feedback_kind_name(FeedbackKind kind);  // "up" / "down" / "good"

struct AgentRef {
  enum class Type { failure_mode, action, quality };
  Type type = Type::quality;
  std::string id;

  std::string str() const;
  auto operator<=>(const AgentRef&) const = default;
};

AgentRef failure_mode_agent(std::string id);
AgentRef action_agent(std::string id);
AgentRef quality_agent();

struct Feedback {
  FeedbackKind kind = FeedbackKind::selection_good;
  AgentRef source;
  AgentRef target;
  /// Failure mode the feedback is about; absent on quality-agent messages.
  std::optional<std::string> subject;
  int round = 0;
  /// Action ids already visited while forwarding; never revisited.
  std::vector<std::string> hop_trail;
};

struct FailureModeAgent {
  std::string failure_mode_id;
  std::set<std::string> selected;  // Sel_g
  int annoyance = 0;               // rounds the bad-safety NCS stayed unresolvable
};

struct ActionAgent {
  std::string action_id;
  std::set<std::string> selected_by;  // SelBy_p
  std::vector<Feedback> inbox;
  int annoyance_select_more = 0;
  int annoyance_select_less = 0;
};

struct QualityAgent {
  Rational budget;
  Rational last_total_cost;
  int annoyance = 0;
};

struct SolverConfig {
  std::uint64_t seed = 0;  // recorded in results; reserved for randomized restarts
  int max_rounds = 10000;
  /// Rounds without NCS and without graph change required to declare
  /// convergence.
  int quiescence_window = 10;
  /// Annoyance level an action agent must reach before it may resolve a
  /// dead-end select-more feedback by adding itself.
  int reorganization_annoyance = 0;
  enum class InitialSelection { empty, all_recommended };
  InitialSelection initial_selection = InitialSelection::empty;
  /// Process select-more feedbacks before select-less ones and let adds win
  /// conflicts.
  bool safety_precedence = true;
  /// Route select-less feedbacks exactly as the source text describes
  /// (inverted relative to select-more). For comparison runs only.
  bool literal_select_less = false;
};

struct SimulationState {
  int round = 0;
  std::map<std::string, FailureModeAgent> failure_modes;
  std::map<std::string, ActionAgent> actions;
  QualityAgent quality;
  TraceLog trace;

  std::set<std::string> selected_action_ids() const;
};

SimulationState init_state(const FmecaModel& model, const SolverConfig& config);

/// Agent dissatisfaction in [0,100]; 0 means fully satisfied.
Rational agent_criticality(const FailureModeAgent& agent, const FmecaModel& model);
Rational agent_criticality(const ActionAgent& agent);
Rational agent_criticality(const QualityAgent& agent);

struct DetectionResult {
  std::vector<Feedback> feedbacks;
  bool ncs_detected = false;
  bool unresolvable = false;
};

/// Failure-mode agent detection: select-more feedbacks to every
/// recommended-but-unselected action while the threshold is violated,
/// selection-good to all recommended actions otherwise. A violated agent
/// with nothing left to select records an unresolvable NCS and raises its
/// annoyance. Mutates the agent's annoyance counter.
DetectionResult detect_bad_safety_criticality(FailureModeAgent& agent, const FmecaModel& model,
                                              int round);

/// Quality-agent detection: select-less feedbacks to every currently
/// selected action agent when the total cost crosses the budget (strictly),
/// selection-good otherwise. Mutates the agent's cost snapshot and
/// annoyance counter.
DetectionResult detect_bad_total_cost(QualityAgent& agent, const SimulationState& state,
                                      const FmecaModel& model, int round);

struct RouteDecision {
  enum class Kind { add, remove, forward, noop };
  Kind kind = Kind::noop;
  std::vector<std::pair<std::string, std::string>> relations;  // (failure mode, action)
  std::string forward_to;  // action id, for Kind::forward
  bool dead_end = false;   // noop because no candidate was left, not a good receipt
};

/// One cooperative routing step for a feedback sitting in an action agent's
/// inbox. May raise the agent's annoyance (dead ends) or reset it
/// (selection-good receipt).
RouteDecision route_feedback(ActionAgent& agent, const Feedback& feedback,
                             const SimulationState& state, const FmecaModel& model,
                             const SolverConfig& config);

struct StepOutcome {
  int ncs_count = 0;
  int mutations = 0;
};

/// One synchronous round: detection, deterministic delivery, inbox
/// processing with forwarding chased to a fixpoint, atomic application of
/// the add/remove intents (adds win conflicts), trace append.
StepOutcome step(SimulationState& state, const FmecaModel& model, const SolverConfig& config);

struct UnresolvedSummary {
  std::vector<std::string> violated_failure_modes;  // still above threshold at the end
  bool bad_total_cost = false;                      // cost still above budget at the end
  /// Thresholds are reachable but not within the budget: the safety-first
  /// best meets every threshold while exceeding the budget, and no visited
  /// configuration was feasible.
  bool budget_infeasible = false;
};

struct SolverResult {
  Configuration best;  // lexicographically best configuration visited
  std::optional<Configuration> best_within_budget;
  Configuration final;
  bool converged = false;
  int rounds_used = 0;
  UnresolvedSummary unresolved;
  TraceLog trace;

  bool feasible_reached(const Rational& budget) const {
    return best_within_budget && best_within_budget->feasible(budget);
  }
};

/// Runs rounds until quiescence (no NCS and no graph change for the
/// configured window), a stalemate (persistent NCS with a frozen graph), or
/// the round limit. Throws std::invalid_argument when validate() reports
/// errors.
SolverResult run(const FmecaModel& model, const SolverConfig& config = {});

}  // namespace fmeca::amas
