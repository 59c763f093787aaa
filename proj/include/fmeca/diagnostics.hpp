#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fmeca {

enum class DiagnosticLevel { error, warning };

/// 1-based position in a source file; only parse diagnostics carry one.
struct SourcePos {
  int line = 0;
  int column = 0;
};

struct Diagnostic {
  DiagnosticLevel level = DiagnosticLevel::error;
  std::string code;     // stable kebab-case identifier, e.g. "rank-out-of-scale"
  std::string message;
  std::optional<SourcePos> pos;

  std::string str() const;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

}  // namespace fmeca
