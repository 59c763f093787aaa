#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fmeca/core.hpp"
#include "fmeca/generator.hpp"
#include "fmeca/ingest.hpp"
#include "fmeca/oracle.hpp"
#include "fmeca/solver.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDiagnosticFailure = 1;
constexpr int kUsageError = 2;

std::string resolve_output(const std::string& path) {
  if (path.empty() || path == "-") return path;
  const char* dir = std::getenv("FMECA_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

std::optional<std::string> read_input(const std::string& path, std::string& error) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    error = "cannot read \"" + path + "\"";
    return std::nullopt;
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

bool write_output(const std::string& path, const std::string& bytes, std::string& error) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    return true;
  }
  std::string resolved = resolve_output(path);
  std::ofstream file(resolved, std::ios::binary | std::ios::trunc);
  if (!file) {
    error = "cannot write \"" + resolved + "\"";
    return false;
  }
  file << bytes;
  return file.good();
}

struct LoadedModel {
  fmeca::ingest::ModelDocument document;
  std::vector<fmeca::Diagnostic> diagnostics;
};

/// Reads and parses a model; nullopt means the caller should exit with the
/// stored code.
std::optional<LoadedModel> load_model(const std::string& path, bool lenient, int& exit_code) {
  std::string error;
  auto bytes = read_input(path, error);
  if (!bytes) {
    std::cerr << "error: " << error << "\n";
    exit_code = kUsageError;
    return std::nullopt;
  }
  auto format = fmeca::ingest::detect_format(*bytes, path);
  auto mode = lenient ? fmeca::ingest::ParseMode::lenient : fmeca::ingest::ParseMode::strict;
  fmeca::ingest::ParseResult parsed = fmeca::ingest::parse_model(*bytes, format, mode);
  if (!parsed.ok()) {
    std::cerr << fmeca::format_diagnostics(parsed.diagnostics);
    exit_code = kDiagnosticFailure;
    return std::nullopt;
  }
  return LoadedModel{std::move(*parsed.document), std::move(parsed.diagnostics)};
}

fmeca::ingest::ReportFormat report_format(const std::string& name) {
  return name == "human" ? fmeca::ingest::ReportFormat::human
                         : fmeca::ingest::ReportFormat::machine;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMECA criticality analysis and preventive-action selection"};
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  bool validate_lenient = false;
  CLI::App* cmd_validate = app.add_subcommand("validate", "check a model file; exit 0 iff clean");
  cmd_validate->add_option("model", validate_path, "model file (json or csv), or - for stdin")
      ->required();
  cmd_validate->add_flag("--lenient", validate_lenient, "downgrade strictness errors to warnings");

  // solve
  std::string solve_path, solve_out, solve_trace, solve_format = "machine";
  std::string solve_budget_override, solve_initial = "empty";
  std::uint64_t solve_seed = 0;
  int solve_max_rounds = 10000;
  int solve_quiescence = 10;
  bool solve_literal_less = false;
  CLI::App* cmd_solve = app.add_subcommand("solve", "run the cooperative multi-agent solver");
  cmd_solve->add_option("model", solve_path, "model file, or - for stdin")->required();
  cmd_solve->add_option("--seed", solve_seed, "deterministic run seed (recorded)");
  cmd_solve->add_option("--max-rounds", solve_max_rounds, "round limit")->check(CLI::PositiveNumber);
  cmd_solve->add_option("--quiescence", solve_quiescence, "quiet rounds required to converge")
      ->check(CLI::PositiveNumber);
  cmd_solve->add_option("--budget-override", solve_budget_override,
                        "replace the model budget with this rational");
  cmd_solve->add_option("--format", solve_format, "report format")
      ->check(CLI::IsMember({"machine", "human"}));
  cmd_solve->add_option("--initial", solve_initial, "starting selection")
      ->check(CLI::IsMember({"empty", "all"}));
  cmd_solve->add_flag("--literal-select-less", solve_literal_less,
                      "source-text select-less routing, for comparison runs");
  cmd_solve->add_option("-o,--out", solve_out, "report path (default stdout)");
  cmd_solve->add_option("--trace-out", solve_trace, "write the event trace to this path");

  // oracle
  std::string oracle_path, oracle_out, oracle_format = "machine";
  int oracle_limit = 20;
  bool oracle_no_prune = false;
  CLI::App* cmd_oracle = app.add_subcommand("oracle", "exact optimum by subset enumeration");
  cmd_oracle->add_option("model", oracle_path, "model file, or - for stdin")->required();
  cmd_oracle->add_option("--limit", oracle_limit, "maximum action count")->check(CLI::PositiveNumber);
  cmd_oracle->add_flag("--no-prune", oracle_no_prune, "plain enumeration without bounds");
  cmd_oracle->add_option("--format", oracle_format, "output format")
      ->check(CLI::IsMember({"machine", "human"}));
  cmd_oracle->add_option("-o,--out", oracle_out, "output path (default stdout)");

  // compare
  std::string compare_solver, compare_oracle, compare_out;
  CLI::App* cmd_compare =
      app.add_subcommand("compare", "gap between a solver report and an oracle result");
  cmd_compare->add_option("solver_report", compare_solver, "machine solver report")->required();
  cmd_compare->add_option("oracle_result", compare_oracle, "machine oracle result")->required();
  cmd_compare->add_option("-o,--out", compare_out, "gap report path (default stdout)");

  // report
  std::string report_result, report_model, report_out, report_fmt = "human";
  CLI::App* cmd_report = app.add_subcommand("report", "regenerate a report from a stored result");
  cmd_report->add_option("solver_report", report_result, "machine solver report")->required();
  cmd_report->add_option("--model", report_model, "model the result was produced from")
      ->required();
  cmd_report->add_option("--format", report_fmt, "output format")
      ->check(CLI::IsMember({"machine", "human"}));
  cmd_report->add_option("-o,--out", report_out, "output path (default stdout)");

  // gen
  int gen_failure_modes = 1, gen_actions = 2;
  std::uint64_t gen_seed = 0;
  bool gen_feasible = false;
  std::string gen_out;
  CLI::App* cmd_gen = app.add_subcommand("gen", "emit a pseudo-random instance");
  cmd_gen->add_option("--failure-modes", gen_failure_modes, "failure mode count")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--actions", gen_actions, "action count")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--seed", gen_seed, "generator seed");
  cmd_gen->add_flag("--feasible", gen_feasible, "plant a within-budget zero-violation cover");
  cmd_gen->add_option("-o,--out", gen_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kUsageError;
  }

  try {
    if (app.got_subcommand(cmd_validate)) {
      int exit_code = kOk;
      std::string error;
      auto bytes = read_input(validate_path, error);
      if (!bytes) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      auto format = fmeca::ingest::detect_format(*bytes, validate_path);
      auto mode = validate_lenient ? fmeca::ingest::ParseMode::lenient
                                   : fmeca::ingest::ParseMode::strict;
      fmeca::ingest::ParseResult parsed = fmeca::ingest::parse_model(*bytes, format, mode);
      std::cout << fmeca::format_diagnostics(parsed.diagnostics);
      if (parsed.ok()) {
        std::cout << "ok: model is valid (" << parsed.diagnostics.size() << " warnings)\n";
        return kOk;
      }
      (void)exit_code;
      return kDiagnosticFailure;
    }

    if (app.got_subcommand(cmd_solve)) {
      int exit_code = kOk;
      auto loaded = load_model(solve_path, false, exit_code);
      if (!loaded) return exit_code;
      fmeca::FmecaModel model = loaded->document.model;
      if (!solve_budget_override.empty()) {
        auto budget = fmeca::Rational::parse(solve_budget_override);
        if (!budget) {
          std::cerr << "error: --budget-override is not a valid rational\n";
          return kUsageError;
        }
        model.budget = *budget;
      }

      fmeca::amas::SolverConfig config;
      config.seed = solve_seed;
      config.max_rounds = solve_max_rounds;
      config.quiescence_window = solve_quiescence;
      config.literal_select_less = solve_literal_less;
      config.initial_selection = solve_initial == "all"
                                     ? fmeca::amas::SolverConfig::InitialSelection::all_recommended
                                     : fmeca::amas::SolverConfig::InitialSelection::empty;

      fmeca::amas::SolverResult result = fmeca::amas::run(model, config);

      std::string error;
      std::string report = fmeca::ingest::write_report(result, model, report_format(solve_format));
      if (!write_output(solve_out, report, error)) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      if (!solve_trace.empty()) {
        if (!write_output(solve_trace, fmeca::amas::write_trace(result.trace), error)) {
          std::cerr << "error: " << error << "\n";
          return kUsageError;
        }
      }
      return result.converged ? kOk : kDiagnosticFailure;
    }

    if (app.got_subcommand(cmd_oracle)) {
      int exit_code = kOk;
      auto loaded = load_model(oracle_path, false, exit_code);
      if (!loaded) return exit_code;
      fmeca::oracle::OracleResult result;
      try {
        result = fmeca::oracle::exact_best(loaded->document.model, oracle_limit, !oracle_no_prune);
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDiagnosticFailure;
      }
      std::string error;
      std::string out = fmeca::ingest::write_oracle_result(result, loaded->document.model,
                                                           report_format(oracle_format));
      if (!write_output(oracle_out, out, error)) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      return kOk;
    }

    if (app.got_subcommand(cmd_compare)) {
      std::string error;
      auto solver_bytes = read_input(compare_solver, error);
      if (!solver_bytes) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      auto oracle_bytes = read_input(compare_oracle, error);
      if (!oracle_bytes) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      auto solver_summary = fmeca::ingest::parse_solver_report(*solver_bytes, &error);
      if (!solver_summary) {
        std::cerr << "error: " << error << "\n";
        return kDiagnosticFailure;
      }
      auto oracle_summary = fmeca::ingest::parse_oracle_result(*oracle_bytes, &error);
      if (!oracle_summary) {
        std::cerr << "error: " << error << "\n";
        return kDiagnosticFailure;
      }
      fmeca::oracle::GapReport gap;
      try {
        gap = fmeca::oracle::compare(solver_summary->best_objective,
                                     solver_summary->feasible_reached,
                                     solver_summary->model_digest, oracle_summary->result,
                                     oracle_summary->model_digest);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDiagnosticFailure;
      }
      std::string report = fmeca::ingest::write_gap_report(gap, solver_summary->model_digest);
      std::string marker = gap.solver_optimal
                               ? std::string("OPTIMAL: solver matches the oracle optimum")
                               : "gap: cost +" + gap.cost_gap_abs.str() +
                                     (gap.cost_gap_rel ? " (rel " + gap.cost_gap_rel->str() + ")"
                                                       : " (no relative gap)");
      if (compare_out.empty() || compare_out == "-") {
        std::cout << report;
        std::cerr << marker << "\n";
      } else {
        if (!write_output(compare_out, report, error)) {
          std::cerr << "error: " << error << "\n";
          return kUsageError;
        }
        std::cout << marker << "\n";
      }
      return kOk;
    }

    if (app.got_subcommand(cmd_report)) {
      int exit_code = kOk;
      auto loaded = load_model(report_model, false, exit_code);
      if (!loaded) return exit_code;
      std::string error;
      auto bytes = read_input(report_result, error);
      if (!bytes) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      auto result = fmeca::ingest::parse_solver_result(*bytes, loaded->document.model, &error);
      if (!result) {
        std::cerr << "error: " << error << "\n";
        return kDiagnosticFailure;
      }
      std::string report = fmeca::ingest::write_report(*result, loaded->document.model,
                                                       report_format(report_fmt));
      if (!write_output(report_out, report, error)) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      return kOk;
    }

    if (app.got_subcommand(cmd_gen)) {
      fmeca::gen::GenParams params;
      params.failure_modes = gen_failure_modes;
      params.actions = gen_actions;
      params.seed = gen_seed;
      params.feasible = gen_feasible;
      std::string error;
      std::string bytes = fmeca::ingest::write_model(fmeca::gen::generate(params));
      if (!write_output(gen_out, bytes, error)) {
        std::cerr << "error: " << error << "\n";
        return kUsageError;
      }
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiagnosticFailure;
  }
  return kUsageError;
}
