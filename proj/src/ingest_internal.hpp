#pragma once

#include <json.hpp>

#include "fmeca/ingest.hpp"

namespace fmeca::ingest::detail {

ParseResult parse_structured(std::string_view bytes, ParseMode mode);
ParseResult parse_tabular(std::string_view bytes, ParseMode mode);

/// Runs validate() on the parsed model and appends its diagnostics, skipping
/// entries the parser already reported (same code and message).
void merge_validation(ParseResult& result);

std::optional<Rational> rational_from_json(const nlohmann::json& value);

SourcePos position_from_offset(std::string_view bytes, size_t offset);

nlohmann::ordered_json configuration_json(const Configuration& config);
nlohmann::ordered_json objective_json(const Objective& objective);
std::optional<Objective> objective_from_json(const nlohmann::json& value);

}  // namespace fmeca::ingest::detail
