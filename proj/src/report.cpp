#include <algorithm>
#include <sstream>

#include "fmeca/core.hpp"
#include "ingest_internal.hpp"

namespace fmeca::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string objective_line(const Objective& objective) {
  return "violations=" + std::to_string(objective.violations) +
         " excess=" + std::to_string(objective.excess) + " cost=" + objective.cost.str();
}

std::string join(const std::vector<std::string>& items, const std::string& separator) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += separator;
    out += item;
  }
  return out;
}

std::string join(const std::set<std::string>& items, const std::string& separator) {
  return join(std::vector<std::string>(items.begin(), items.end()), separator);
}

/// Left-aligned fixed-width table with two-space gutters.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return "";
  std::vector<size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(widths[i] - row[i].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += "\n";
  }
  return out;
}

std::string human_configuration_table(const Configuration& config, const FmecaModel& model) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"failure mode", "component", "S", "O", "D", "initial", "threshold", "residual",
                  "verdict", "selected actions"});
  for (const auto& outcome : config.outcomes) {
    const FailureMode* fm = model.failure_mode(outcome.failure_mode_id);
    rows.push_back({outcome.failure_mode_id,
                    fm ? fm->component_id : "",
                    fm ? std::to_string(fm->severity.value) : "",
                    fm ? std::to_string(fm->occurrence.value) : "",
                    fm ? std::to_string(fm->detectability.value) : "",
                    std::to_string(outcome.initial_criticality),
                    std::to_string(outcome.critical_threshold),
                    std::to_string(outcome.residual_criticality),
                    outcome.critical ? "CRITICAL" : "ok",
                    join(outcome.selected_action_ids, ", ")});
  }
  return render_table(rows);
}

std::optional<Configuration> configuration_from_json(const json& value, const FmecaModel& model) {
  if (!value.is_object() || !value.contains("selected")) return std::nullopt;
  std::set<std::string> selected;
  for (const auto& id : value["selected"]) {
    if (!id.is_string()) return std::nullopt;
    selected.insert(id.get<std::string>());
  }
  for (const auto& id : selected) {
    if (model.action(id) == nullptr) return std::nullopt;
  }
  return evaluate(model, selected);
}

}  // namespace

std::string write_report(const amas::SolverResult& result, const FmecaModel& model,
                         ReportFormat format) {
  std::string digest = model_digest(model);
  bool feasible_reached = result.feasible_reached(model.budget);

  if (format == ReportFormat::machine) {
    ordered_json root = ordered_json::object();
    root["version"] = "1";
    root["kind"] = "solver-report";
    root["model_digest"] = digest;
    root["converged"] = result.converged;
    root["rounds_used"] = result.rounds_used;
    root["feasible"] = result.final.feasible(model.budget);
    root["feasible_reached"] = feasible_reached;
    root["budget"] = model.budget.str();
    root["best"] = detail::configuration_json(result.best);
    if (result.best_within_budget) {
      root["best_within_budget"] = detail::configuration_json(*result.best_within_budget);
    } else {
      root["best_within_budget"] = nullptr;
    }
    root["final"] = detail::configuration_json(result.final);
    ordered_json unresolved = ordered_json::object();
    unresolved["violated_failure_modes"] = result.unresolved.violated_failure_modes;
    unresolved["bad_total_cost"] = result.unresolved.bad_total_cost;
    unresolved["budget_infeasible"] = result.unresolved.budget_infeasible;
    root["unresolved"] = std::move(unresolved);
    return root.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "FMECA solver report\n";
  out << "===================\n";
  out << "model digest    : " << digest << "\n";
  out << "converged       : " << (result.converged ? "yes" : "no") << "\n";
  out << "rounds used     : " << result.rounds_used << "\n";
  out << "total cost      : " << result.best.total_cost.str() << "\n";
  out << "budget          : " << model.budget.str() << "\n";
  out << "feasible        : " << (feasible_reached ? "yes" : "no") << "\n";
  out << "\n";
  out << human_configuration_table(result.best, model);
  out << "\n";
  out << "best             : " << objective_line(result.best.objective) << "\n";
  if (result.best_within_budget &&
      result.best_within_budget->selected_action_ids != result.best.selected_action_ids) {
    out << "best within budget: " << objective_line(result.best_within_budget->objective)
        << "  actions: " << join(result.best_within_budget->selected_action_ids, ", ") << "\n";
  }
  out << "final            : " << objective_line(result.final.objective) << "\n";
  if (!result.unresolved.violated_failure_modes.empty()) {
    out << "unresolved thresholds: " << join(result.unresolved.violated_failure_modes, ", ")
        << "\n";
  }
  if (result.unresolved.bad_total_cost) {
    out << "unresolved budget: total cost " << result.final.total_cost.str()
        << " exceeds budget " << model.budget.str() << "\n";
  }
  if (result.unresolved.budget_infeasible) {
    out << "budget infeasible: thresholds are only reachable above the budget\n";
  }
  return out.str();
}

std::optional<SolverReportSummary> parse_solver_report(std::string_view bytes,
                                                       std::string* error) {
  json root = json::parse(bytes, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    if (error) *error = "solver report is not a JSON object";
    return std::nullopt;
  }
  if (root.value("kind", "") != "solver-report") {
    if (error) *error = "not a solver report (kind=\"" + root.value("kind", std::string()) + "\")";
    return std::nullopt;
  }
  SolverReportSummary summary;
  summary.model_digest = root.value("model_digest", "");
  summary.converged = root.value("converged", false);
  summary.feasible_reached = root.value("feasible_reached", false);
  if (!root.contains("best")) {
    if (error) *error = "solver report without a best configuration";
    return std::nullopt;
  }
  auto objective = detail::objective_from_json(root["best"].value("objective", json::object()));
  if (!objective) {
    if (error) *error = "solver report with an unreadable best objective";
    return std::nullopt;
  }
  summary.best_objective = *objective;
  return summary;
}

std::optional<amas::SolverResult> parse_solver_result(std::string_view bytes,
                                                      const FmecaModel& model,
                                                      std::string* error) {
  json root = json::parse(bytes, nullptr, false);
  if (root.is_discarded() || !root.is_object() || root.value("kind", "") != "solver-report") {
    if (error) *error = "input is not a machine-readable solver report";
    return std::nullopt;
  }
  std::string stored = root.value("model_digest", "");
  std::string expected = model_digest(model);
  if (stored != expected) {
    if (error) {
      *error = "digest mismatch: report was produced from " + stored + ", model hashes to " +
               expected;
    }
    return std::nullopt;
  }

  amas::SolverResult result;
  result.converged = root.value("converged", false);
  result.rounds_used = root.value("rounds_used", 0);
  auto best = configuration_from_json(root.value("best", json::object()), model);
  auto final = configuration_from_json(root.value("final", json::object()), model);
  if (!best || !final) {
    if (error) *error = "solver report with unreadable configurations";
    return std::nullopt;
  }
  result.best = std::move(*best);
  result.final = std::move(*final);
  if (root.contains("best_within_budget") && !root["best_within_budget"].is_null()) {
    auto bwb = configuration_from_json(root["best_within_budget"], model);
    if (bwb) result.best_within_budget = std::move(*bwb);
  }
  const json& unresolved = root.value("unresolved", json::object());
  for (const auto& id : unresolved.value("violated_failure_modes", json::array())) {
    if (id.is_string()) result.unresolved.violated_failure_modes.push_back(id.get<std::string>());
  }
  result.unresolved.bad_total_cost = unresolved.value("bad_total_cost", false);
  result.unresolved.budget_infeasible = unresolved.value("budget_infeasible", false);
  return result;
}

std::string write_oracle_result(const oracle::OracleResult& result, const FmecaModel& model,
                                ReportFormat format) {
  std::string digest = model_digest(model);
  if (format == ReportFormat::machine) {
    ordered_json root = ordered_json::object();
    root["version"] = "1";
    root["kind"] = "oracle-result";
    root["model_digest"] = digest;
    root["enumerated_count"] = result.enumerated_count;
    root["feasible_exists"] = result.feasible_exists;
    root["optimal"] = detail::configuration_json(result.optimal);
    root["budget_best"] = detail::configuration_json(result.budget_best);
    return root.dump(2) + "\n";
  }

  std::ostringstream out;
  out << "oracle result\n";
  out << "=============\n";
  out << "model digest     : " << digest << "\n";
  out << "subsets evaluated: " << result.enumerated_count << "\n";
  out << "feasible exists  : " << (result.feasible_exists ? "yes" : "no") << "\n";
  out << "optimal          : " << objective_line(result.optimal_objective)
      << "  actions: " << join(result.optimal.selected_action_ids, ", ") << "\n";
  out << "within budget    : " << objective_line(result.budget_best_objective)
      << "  actions: " << join(result.budget_best.selected_action_ids, ", ") << "\n";
  out << "\n";
  out << human_configuration_table(result.optimal, model);
  return out.str();
}

std::optional<OracleResultSummary> parse_oracle_result(std::string_view bytes,
                                                       std::string* error) {
  json root = json::parse(bytes, nullptr, false);
  if (root.is_discarded() || !root.is_object() || root.value("kind", "") != "oracle-result") {
    if (error) *error = "input is not a machine-readable oracle result";
    return std::nullopt;
  }
  OracleResultSummary summary;
  summary.model_digest = root.value("model_digest", "");
  summary.result.enumerated_count = root.value("enumerated_count", std::uint64_t(0));
  summary.result.feasible_exists = root.value("feasible_exists", false);

  auto load = [&](const char* key, Configuration& config, Objective& objective) {
    if (!root.contains(key)) return false;
    const json& entry = root[key];
    auto obj = detail::objective_from_json(entry.value("objective", json::object()));
    if (!obj) return false;
    objective = *obj;
    config.objective = *obj;
    config.total_cost = obj->cost;
    for (const auto& id : entry.value("selected", json::array())) {
      if (id.is_string()) config.selected_action_ids.insert(id.get<std::string>());
    }
    return true;
  };
  if (!load("optimal", summary.result.optimal, summary.result.optimal_objective) ||
      !load("budget_best", summary.result.budget_best, summary.result.budget_best_objective)) {
    if (error) *error = "oracle result with unreadable configurations";
    return std::nullopt;
  }
  return summary;
}

std::string write_gap_report(const oracle::GapReport& report, std::string_view digest) {
  ordered_json root = ordered_json::object();
  root["version"] = "1";
  root["kind"] = "gap-report";
  root["model_digest"] = std::string(digest);
  root["solver_objective"] = detail::objective_json(report.solver_objective);
  root["oracle_objective"] = detail::objective_json(report.oracle_objective);
  root["cost_gap_abs"] = report.cost_gap_abs.str();
  if (report.cost_gap_rel) {
    root["cost_gap_rel"] = report.cost_gap_rel->str();
  } else {
    root["cost_gap_rel"] = nullptr;
  }
  root["feasibility_agreement"] = report.feasibility_agreement;
  root["solver_optimal"] = report.solver_optimal;
  return root.dump(2) + "\n";
}

}  // namespace fmeca::ingest
