#include "fmeca/diagnostics.hpp"

namespace fmeca {

std::string Diagnostic::str() const {
  std::string out = level == DiagnosticLevel::error ? "error" : "warning";
  out += "[" + code + "]";
  if (pos) {
    out += " " + std::to_string(pos->line) + ":" + std::to_string(pos->column);
  }
  out += " " + message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.level == DiagnosticLevel::error) return true;
  }
  return false;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    out += d.str();
    out += "\n";
  }
  return out;
}

}  // namespace fmeca
