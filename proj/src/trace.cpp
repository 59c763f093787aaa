#include "fmeca/trace.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

#include "fmeca/core.hpp"
#include "fmeca/rational.hpp"

namespace fmeca::amas {

std::string TraceEvent::str() const {
  nlohmann::ordered_json line = nlohmann::ordered_json::object();
  line["round"] = round;
  line["agent"] = agent;
  line["event"] = event;
  for (const auto& [key, value] : payload.items()) line[key] = value;
  return line.dump();
}

std::string write_trace(const TraceLog& trace) {
  std::string out;
  for (const auto& ev : trace) {
    out += ev.str();
    out += "\n";
  }
  return out;
}

std::optional<TraceLog> parse_trace(std::string_view bytes, std::string* error) {
  TraceLog out;
  std::istringstream stream{std::string(bytes)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("round") || !j.contains("agent") ||
        !j.contains("event") || !j["round"].is_number_integer() || !j["agent"].is_string() ||
        !j["event"].is_string()) {
      if (error) *error = "malformed trace line " + std::to_string(line_no);
      return std::nullopt;
    }
    TraceEvent ev;
    ev.round = j["round"].get<int>();
    ev.agent = j["agent"].get<std::string>();
    ev.event = j["event"].get<std::string>();
    ev.payload = nlohmann::ordered_json::object();
    for (const auto& [key, value] : j.items()) {
      if (key == "round" || key == "agent" || key == "event") continue;
      ev.payload[key] = value;
    }
    out.push_back(std::move(ev));
  }
  return out;
}

namespace {

using Relation = std::pair<std::string, std::string>;

std::set<Relation> relation_set(const nlohmann::ordered_json& pairs, bool swap,
                                std::vector<std::string>& violations, int round) {
  std::set<Relation> out;
  if (!pairs.is_array()) {
    violations.push_back("round " + std::to_string(round) + ": state event without relation list");
    return out;
  }
  for (const auto& entry : pairs) {
    if (!entry.is_array() || entry.size() != 2) continue;
    std::string a = entry[0].get<std::string>();
    std::string b = entry[1].get<std::string>();
    if (swap) std::swap(a, b);
    out.insert({a, b});
  }
  return out;
}

}  // namespace

std::vector<std::string> audit_trace(const FmecaModel& model, const TraceLog& trace) {
  std::vector<std::string> violations;

  std::map<std::string, std::set<std::string>> recommended;
  for (const auto& fm : model.failure_modes) {
    recommended[fm.id] = std::set<std::string>(fm.recommended_action_ids.begin(),
                                               fm.recommended_action_ids.end());
  }

  std::set<Relation> replayed;  // built from add/remove events
  bool have_state = false;
  bool seeded = false;          // the first state event is the replay baseline
  bool mutation_seen = false;
  std::map<int, std::set<Relation>> adds_by_round, removes_by_round;
  std::optional<Objective> previous_best;

  for (const auto& ev : trace) {
    if (ev.event == "add" || ev.event == "remove") {
      mutation_seen = true;
      Relation relation{ev.payload.value("failure_mode", ""), ev.payload.value("action", "")};
      if (ev.event == "add") {
        adds_by_round[ev.round].insert(relation);
        if (!replayed.insert(relation).second) {
          violations.push_back("round " + std::to_string(ev.round) + ": add of existing relation " +
                               relation.first + "-" + relation.second);
        }
      } else {
        removes_by_round[ev.round].insert(relation);
        if (replayed.erase(relation) == 0) {
          violations.push_back("round " + std::to_string(ev.round) +
                               ": remove of missing relation " + relation.first + "-" +
                               relation.second);
        }
      }
      continue;
    }

    if (ev.event == "state") {
      have_state = true;
      std::set<Relation> selections =
          relation_set(ev.payload.value("selections", nlohmann::ordered_json::array()), false,
                       violations, ev.round);
      std::set<Relation> selected_by =
          relation_set(ev.payload.value("selected_by", nlohmann::ordered_json::array()), true,
                       violations, ev.round);
      if (selections != selected_by) {
        violations.push_back("round " + std::to_string(ev.round) +
                             ": selection graph is asymmetric");
      }
      if (!seeded && !mutation_seen) {
        replayed = selections;  // non-empty initial selections are legitimate
        seeded = true;
      } else if (selections != replayed) {
        violations.push_back("round " + std::to_string(ev.round) +
                             ": state does not match replayed add/remove events");
      }
      for (const auto& [fm_id, action_id] : selections) {
        auto it = recommended.find(fm_id);
        if (it == recommended.end() || it->second.count(action_id) == 0) {
          violations.push_back("round " + std::to_string(ev.round) + ": selection " + fm_id +
                               "-" + action_id + " outside the recommended set");
        }
      }
      const auto& crit = ev.payload.value("criticality", nlohmann::ordered_json::object());
      for (const auto& [agent, value] : crit.items()) {
        auto parsed = Rational::parse(value.get<std::string>());
        if (!parsed || parsed->is_negative() || Rational(100) < *parsed) {
          violations.push_back("round " + std::to_string(ev.round) + ": agent-criticality of " +
                               agent + " outside [0,100]");
        }
      }
      continue;
    }

    if (ev.event == "best") {
      Objective best;
      best.violations = ev.payload.value("violations", 0);
      best.excess = ev.payload.value("excess", 0);
      auto cost = Rational::parse(ev.payload.value("cost", std::string("0")));
      if (!cost) {
        violations.push_back("round " + std::to_string(ev.round) + ": unparsable best cost");
        continue;
      }
      best.cost = *cost;
      if (previous_best && *previous_best < best) {
        violations.push_back("round " + std::to_string(ev.round) +
                             ": best-so-far objective regressed");
      }
      previous_best = best;
    }
  }

  for (const auto& [round, adds] : adds_by_round) {
    auto it = removes_by_round.find(round);
    if (it == removes_by_round.end()) continue;
    std::vector<Relation> overlap;
    std::set_intersection(adds.begin(), adds.end(), it->second.begin(), it->second.end(),
                          std::back_inserter(overlap));
    for (const auto& relation : overlap) {
      violations.push_back("round " + std::to_string(round) + ": relation " + relation.first +
                           "-" + relation.second + " both added and removed");
    }
  }

  if (!have_state) violations.push_back("trace contains no state events");
  return violations;
}

}  // namespace fmeca::amas
