#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fmeca/model.hpp"

namespace fmeca::amas {

/// One line of the solver's deterministic event log. Serialized as JSONL
/// with a stable field order: round, agent, event, then payload fields in
/// insertion order.
struct TraceEvent {
  int round = 0;
  std::string agent;   // "fm:<id>", "act:<id>", "quality" or "sim"
  std::string event;   // "state", "ncs", "feedback", "forward", "add", ...
  nlohmann::ordered_json payload = nlohmann::ordered_json::object();

  std::string str() const;
};

using TraceLog = std::vector<TraceEvent>;

std::string write_trace(const TraceLog& trace);
std::optional<TraceLog> parse_trace(std::string_view bytes, std::string* error = nullptr);

/// Replays a trace against its model and reports every invariant violation:
/// selection-graph symmetry, add/remove disjointness per round, the
/// [0,100] agent-criticality range, selections staying inside recommended
/// sets, and lexicographic monotonicity of the best-so-far objective.
/// Returns an empty list for a clean trace.
std::vector<std::string> audit_trace(const FmecaModel& model, const TraceLog& trace);

}  // namespace fmeca::amas
