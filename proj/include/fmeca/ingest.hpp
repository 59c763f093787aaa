#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmeca/diagnostics.hpp"
#include "fmeca/model.hpp"
#include "fmeca/oracle.hpp"
#include "fmeca/solver.hpp"

namespace fmeca::ingest {

struct ModelDocument {
  std::string format_version = "1";
  FmecaModel model;
  std::map<std::string, std::string> metadata;
};

enum class InputFormat { structured, tabular };
enum class ParseMode { strict, lenient };

struct ParseResult {
  /// Present whenever the input was structurally readable, even if semantic
  /// errors were found; check ok() before trusting the model.
  std::optional<ModelDocument> document;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return document.has_value() && !has_errors(diagnostics); }
};

/// Total: any byte input yields a document or diagnostics, never a throw.
ParseResult parse_model(std::string_view bytes, InputFormat format,
                        ParseMode mode = ParseMode::strict);

/// Picks tabular for ".csv" path hints or inputs that do not start with
/// '{', structured otherwise.
InputFormat detect_format(std::string_view bytes, std::string_view path_hint);

/// Canonical structured-text serialization: sorted ids, fixed key order,
/// canonical rational strings. parse_model(write_model(d)) reproduces d and
/// re-serializes to identical bytes.
std::string write_model(const ModelDocument& document);

/// Content hash of the model itself (metadata excluded), as 16 hex digits.
std::string model_digest(const FmecaModel& model);

enum class ReportFormat { machine, human };

std::string write_report(const amas::SolverResult& result, const FmecaModel& model,
                         ReportFormat format);

/// The slice of a stored solver report that the compare tool needs.
struct SolverReportSummary {
  std::string model_digest;
  Objective best_objective;
  bool feasible_reached = false;
  bool converged = false;
};

std::optional<SolverReportSummary> parse_solver_report(std::string_view bytes,
                                                       std::string* error = nullptr);

/// Rebuilds a full solver result from a stored machine report so reports can
/// be regenerated. Fails (with an explanation) when the stored digest does
/// not match the given model.
std::optional<amas::SolverResult> parse_solver_result(std::string_view bytes,
                                                      const FmecaModel& model,
                                                      std::string* error = nullptr);

std::string write_oracle_result(const oracle::OracleResult& result, const FmecaModel& model,
                                ReportFormat format);

struct OracleResultSummary {
  std::string model_digest;
  oracle::OracleResult result;
};

std::optional<OracleResultSummary> parse_oracle_result(std::string_view bytes,
                                                       std::string* error = nullptr);

std::string write_gap_report(const oracle::GapReport& report, std::string_view digest);

}  // namespace fmeca::ingest
