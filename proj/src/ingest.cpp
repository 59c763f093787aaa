#include "fmeca/ingest.hpp"

#include <algorithm>

#include "fmeca/core.hpp"
#include "ingest_internal.hpp"

namespace fmeca::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace detail {

SourcePos position_from_offset(std::string_view bytes, size_t offset) {
  SourcePos pos{1, 1};
  for (size_t i = 0; i < offset && i < bytes.size(); ++i) {
    if (bytes[i] == '\n') {
      pos.line += 1;
      pos.column = 1;
    } else {
      pos.column += 1;
    }
  }
  return pos;
}

std::optional<Rational> rational_from_json(const json& value) {
  if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
  if (value.is_number_unsigned()) {
    std::uint64_t v = value.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
    return Rational(static_cast<std::int64_t>(v));
  }
  // Doubles round-trip through their shortest decimal form, so the rational
  // matches the decimal the author wrote.
  if (value.is_number_float()) return Rational::parse(value.dump());
  if (value.is_string()) return Rational::parse(value.get<std::string>());
  return std::nullopt;
}

void merge_validation(ParseResult& result) {
  if (!result.document) return;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& d : result.diagnostics) seen.insert({d.code, d.message});
  for (auto& d : validate(result.document->model)) {
    if (seen.count({d.code, d.message}) > 0) continue;
    result.diagnostics.push_back(std::move(d));
  }
}

}  // namespace detail

namespace {

struct Collector {
  std::vector<Diagnostic>& diagnostics;
  ParseMode mode;

  void error(std::string code, std::string message) {
    diagnostics.push_back(
        Diagnostic{DiagnosticLevel::error, std::move(code), std::move(message), std::nullopt});
  }
  void warn(std::string code, std::string message) {
    diagnostics.push_back(
        Diagnostic{DiagnosticLevel::warning, std::move(code), std::move(message), std::nullopt});
  }
  /// Error under strict parsing, warning under lenient.
  void strictness(std::string code, std::string message) {
    if (mode == ParseMode::strict) {
      error(std::move(code), std::move(message));
    } else {
      warn(std::move(code), std::move(message));
    }
  }
};

void check_known_keys(Collector& ctx, const json& object, std::string_view context,
                      std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : object.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      ctx.strictness("unknown-key",
                     std::string(context) + ": unknown key \"" + key + "\"");
    }
  }
}

std::optional<std::string> string_field(Collector& ctx, const json& object,
                                        std::string_view context, const std::string& key,
                                        bool required) {
  auto it = object.find(key);
  if (it == object.end()) {
    if (required) {
      ctx.error("missing-key", std::string(context) + ": missing required key \"" + key + "\"");
    }
    return std::nullopt;
  }
  if (!it->is_string()) {
    ctx.error("wrong-type", std::string(context) + ": \"" + key + "\" must be a string");
    return std::nullopt;
  }
  return it->get<std::string>();
}

std::optional<int> int_field(Collector& ctx, const json& value, std::string_view context) {
  if (!value.is_number_integer() && !value.is_number_unsigned()) {
    ctx.error("wrong-type", std::string(context) + " must be an integer");
    return std::nullopt;
  }
  return value.get<int>();
}

std::optional<Rank> parse_rank(Collector& ctx, const json& value, const RatingScale& scale,
                               std::string_view context) {
  if (value.is_number_integer() || value.is_number_unsigned()) {
    return Rank{value.get<int>()};
  }
  if (value.is_string()) {
    auto rank = scale.rank_for_label(value.get<std::string>());
    if (!rank) {
      ctx.error("unknown-rank-label", std::string(context) + ": unknown " +
                                          std::string(dimension_name(scale.dimension)) +
                                          " label \"" + value.get<std::string>() + "\"");
      return std::nullopt;
    }
    return Rank{*rank};
  }
  ctx.error("wrong-type", std::string(context) + " must be an integer rank or a scale label");
  return std::nullopt;
}

void parse_scales(Collector& ctx, const json& scales, FmecaModel& model) {
  check_known_keys(ctx, scales, "scales", {"severity", "occurrence", "detectability"});
  for (Dimension d : kDimensions) {
    auto it = scales.find(std::string(dimension_name(d)));
    if (it == scales.end()) continue;
    if (!it->is_array()) {
      ctx.error("wrong-type", "scales." + std::string(dimension_name(d)) + " must be an array");
      continue;
    }
    RatingScale scale;
    scale.dimension = d;
    size_t index = 0;
    for (const auto& entry : *it) {
      std::string context =
          "scales." + std::string(dimension_name(d)) + "[" + std::to_string(index++) + "]";
      if (!entry.is_object()) {
        ctx.error("wrong-type", context + " must be an object");
        continue;
      }
      check_known_keys(ctx, entry, context, {"rank", "label", "description"});
      ScaleLevel level;
      if (auto rank = entry.find("rank"); rank != entry.end()) {
        if (auto v = int_field(ctx, *rank, context + ".rank")) level.rank = *v;
      } else {
        ctx.error("missing-key", context + ": missing required key \"rank\"");
      }
      if (auto label = string_field(ctx, entry, context, "label", true)) level.label = *label;
      if (auto description = string_field(ctx, entry, context, "description", false)) {
        level.description = *description;
      }
      scale.levels.push_back(std::move(level));
    }
    model.scale(d) = std::move(scale);
  }
}

void parse_components(Collector& ctx, const json& components, FmecaModel& model) {
  size_t index = 0;
  for (const auto& entry : components) {
    std::string context = "components[" + std::to_string(index++) + "]";
    if (!entry.is_object()) {
      ctx.error("wrong-type", context + " must be an object");
      continue;
    }
    check_known_keys(ctx, entry, context, {"id", "name", "function", "critical_threshold"});
    Component component;
    if (auto id = string_field(ctx, entry, context, "id", true)) component.id = *id;
    component.name = string_field(ctx, entry, context, "name", false).value_or(component.id);
    component.function = string_field(ctx, entry, context, "function", false).value_or("");
    if (auto it = entry.find("critical_threshold"); it != entry.end()) {
      if (auto v = int_field(ctx, *it, context + ".critical_threshold")) {
        component.default_critical_threshold = *v;
      }
    }
    model.components.push_back(std::move(component));
  }
}

void parse_failure_modes(Collector& ctx, const json& failure_modes, FmecaModel& model) {
  size_t index = 0;
  for (const auto& entry : failure_modes) {
    std::string context = "failure_modes[" + std::to_string(index++) + "]";
    if (!entry.is_object()) {
      ctx.error("wrong-type", context + " must be an object");
      continue;
    }
    check_known_keys(ctx, entry, context,
                     {"id", "component", "description", "causes", "effects", "severity",
                      "occurrence", "detectability", "critical_threshold", "recommended_actions",
                      "alternative_groups"});
    FailureMode fm;
    if (auto id = string_field(ctx, entry, context, "id", true)) fm.id = *id;
    if (!fm.id.empty()) context = "failure mode \"" + fm.id + "\"";
    fm.component_id = string_field(ctx, entry, context, "component", false).value_or("");
    fm.description = string_field(ctx, entry, context, "description", false).value_or("");
    fm.causes = string_field(ctx, entry, context, "causes", false).value_or("");
    fm.effects = string_field(ctx, entry, context, "effects", false).value_or("");

    for (Dimension d : kDimensions) {
      std::string key(dimension_name(d));
      auto it = entry.find(key);
      if (it == entry.end()) {
        ctx.error("missing-key", context + ": missing required key \"" + key + "\"");
        continue;
      }
      if (auto rank = parse_rank(ctx, *it, model.scale(d), context)) {
        switch (d) {
          case Dimension::severity: fm.severity = *rank; break;
          case Dimension::occurrence: fm.occurrence = *rank; break;
          case Dimension::detectability: fm.detectability = *rank; break;
        }
      }
    }

    if (auto it = entry.find("critical_threshold"); it != entry.end()) {
      if (auto v = int_field(ctx, *it, context + ".critical_threshold")) {
        fm.critical_threshold = *v;
      }
    } else {
      // The component may carry a default threshold for its failure modes.
      const Component* owner = model.component(fm.component_id);
      if (owner != nullptr && owner->default_critical_threshold) {
        fm.critical_threshold = *owner->default_critical_threshold;
      } else {
        ctx.error("missing-key",
                  context + ": missing \"critical_threshold\" and the component declares no default");
      }
    }

    if (auto it = entry.find("recommended_actions"); it != entry.end()) {
      if (it->is_array()) {
        for (const auto& action : *it) {
          if (action.is_string()) {
            fm.recommended_action_ids.push_back(action.get<std::string>());
          } else {
            ctx.error("wrong-type", context + ": recommended_actions entries must be strings");
          }
        }
      } else {
        ctx.error("wrong-type", context + ".recommended_actions must be an array");
      }
    }
    if (auto it = entry.find("alternative_groups"); it != entry.end()) {
      if (it->is_array()) {
        for (const auto& group : *it) {
          std::vector<std::string> ids;
          if (!group.is_array()) {
            ctx.error("wrong-type", context + ".alternative_groups entries must be arrays");
            continue;
          }
          for (const auto& action : group) {
            if (action.is_string()) ids.push_back(action.get<std::string>());
          }
          fm.alternative_groups.push_back(std::move(ids));
        }
      } else {
        ctx.error("wrong-type", context + ".alternative_groups must be an array");
      }
    }
    model.failure_modes.push_back(std::move(fm));
  }
}

void parse_actions(Collector& ctx, const json& actions, FmecaModel& model) {
  size_t index = 0;
  for (const auto& entry : actions) {
    std::string context = "actions[" + std::to_string(index++) + "]";
    if (!entry.is_object()) {
      ctx.error("wrong-type", context + " must be an object");
      continue;
    }
    check_known_keys(ctx, entry, context, {"id", "description", "cost", "mitigations"});
    PreventiveAction action;
    if (auto id = string_field(ctx, entry, context, "id", true)) action.id = *id;
    if (!action.id.empty()) context = "action \"" + action.id + "\"";
    action.description = string_field(ctx, entry, context, "description", false).value_or("");

    if (auto it = entry.find("cost"); it != entry.end()) {
      if (auto cost = detail::rational_from_json(*it)) {
        action.cost = *cost;
      } else {
        ctx.error("bad-number", context + ": cost is not a valid rational");
      }
    } else {
      ctx.error("missing-key", context + ": missing required key \"cost\"");
    }

    if (auto it = entry.find("mitigations"); it != entry.end()) {
      if (!it->is_object()) {
        ctx.error("wrong-type", context + ".mitigations must be an object");
      } else {
        for (const auto& [fm_id, effect_json] : it->items()) {
          std::string effect_context = context + ".mitigations." + fm_id;
          if (!effect_json.is_object()) {
            ctx.error("wrong-type", effect_context + " must be an object");
            continue;
          }
          check_known_keys(ctx, effect_json, effect_context,
                           {"severity", "occurrence", "detectability"});
          MitigationEffect effect;
          for (Dimension d : kDimensions) {
            auto delta = effect_json.find(std::string(dimension_name(d)));
            if (delta == effect_json.end()) continue;
            if (auto v = int_field(ctx, *delta,
                                   effect_context + "." + std::string(dimension_name(d)))) {
              switch (d) {
                case Dimension::severity: effect.severity = *v; break;
                case Dimension::occurrence: effect.occurrence = *v; break;
                case Dimension::detectability: effect.detectability = *v; break;
              }
            }
          }
          action.mitigations.emplace(fm_id, effect);
        }
      }
    }
    model.actions.push_back(std::move(action));
  }
}

}  // namespace

namespace detail {

ParseResult parse_structured(std::string_view bytes, ParseMode mode) {
  ParseResult result;
  Collector ctx{result.diagnostics, mode};

  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    result.diagnostics.push_back(Diagnostic{DiagnosticLevel::error, "syntax-error", e.what(),
                                            position_from_offset(bytes, offset)});
    return result;
  }
  if (!root.is_object()) {
    ctx.error("wrong-type", "top level must be an object");
    return result;
  }

  check_known_keys(ctx, root, "document",
                   {"version", "scales", "components", "failure_modes", "actions", "budget",
                    "metadata"});

  ModelDocument doc;
  if (auto it = root.find("version"); it != root.end()) {
    std::string version = it->is_string() ? it->get<std::string>() : it->dump();
    if (version != "1") {
      ctx.error("version-mismatch", "unsupported format version \"" + version + "\"");
    }
    doc.format_version = version;
  } else {
    ctx.strictness("missing-key", "document: missing required key \"version\"");
  }

  if (auto it = root.find("scales"); it != root.end()) {
    if (it->is_object()) {
      parse_scales(ctx, *it, doc.model);
    } else {
      ctx.error("wrong-type", "scales must be an object");
    }
  }
  if (auto it = root.find("components"); it != root.end()) {
    if (it->is_array()) {
      parse_components(ctx, *it, doc.model);
    } else {
      ctx.error("wrong-type", "components must be an array");
    }
  }
  if (auto it = root.find("failure_modes"); it != root.end()) {
    if (it->is_array()) {
      parse_failure_modes(ctx, *it, doc.model);
    } else {
      ctx.error("wrong-type", "failure_modes must be an array");
    }
  }
  if (auto it = root.find("actions"); it != root.end()) {
    if (it->is_array()) {
      parse_actions(ctx, *it, doc.model);
    } else {
      ctx.error("wrong-type", "actions must be an array");
    }
  }
  if (auto it = root.find("budget"); it != root.end()) {
    if (auto budget = rational_from_json(*it)) {
      doc.model.budget = *budget;
    } else {
      ctx.error("bad-number", "budget is not a valid rational");
    }
  } else {
    ctx.strictness("missing-key", "document: missing required key \"budget\"");
  }
  if (auto it = root.find("metadata"); it != root.end()) {
    if (it->is_object()) {
      for (const auto& [key, value] : it->items()) {
        if (value.is_string()) {
          doc.metadata[key] = value.get<std::string>();
        } else if (mode == ParseMode::lenient) {
          ctx.warn("wrong-type", "metadata." + key + " coerced to string");
          doc.metadata[key] = value.dump();
        } else {
          ctx.error("wrong-type", "metadata." + key + " must be a string");
        }
      }
    } else {
      ctx.error("wrong-type", "metadata must be an object");
    }
  }

  result.document = std::move(doc);
  merge_validation(result);
  return result;
}

nlohmann::ordered_json objective_json(const Objective& objective) {
  ordered_json out = ordered_json::object();
  out["violations"] = objective.violations;
  out["excess"] = objective.excess;
  out["cost"] = objective.cost.str();
  return out;
}

std::optional<Objective> objective_from_json(const json& value) {
  if (!value.is_object()) return std::nullopt;
  Objective obj;
  if (!value.contains("violations") || !value.contains("excess") || !value.contains("cost")) {
    return std::nullopt;
  }
  obj.violations = value["violations"].get<int>();
  obj.excess = value["excess"].get<int>();
  auto cost = rational_from_json(value["cost"]);
  if (!cost) return std::nullopt;
  obj.cost = *cost;
  return obj;
}

nlohmann::ordered_json configuration_json(const Configuration& config) {
  ordered_json out = ordered_json::object();
  out["selected"] = config.selected_action_ids;
  out["total_cost"] = config.total_cost.str();
  out["objective"] = objective_json(config.objective);
  auto rows = ordered_json::array();
  for (const auto& outcome : config.outcomes) {
    ordered_json row = ordered_json::object();
    row["id"] = outcome.failure_mode_id;
    row["initial"] = outcome.initial_criticality;
    row["residual"] = outcome.residual_criticality;
    row["threshold"] = outcome.critical_threshold;
    row["critical"] = outcome.critical;
    row["selected_actions"] = outcome.selected_action_ids;
    rows.push_back(std::move(row));
  }
  out["failure_modes"] = std::move(rows);
  return out;
}

}  // namespace detail

ParseResult parse_model(std::string_view bytes, InputFormat format, ParseMode mode) {
  if (format == InputFormat::structured) return detail::parse_structured(bytes, mode);
  return detail::parse_tabular(bytes, mode);
}

InputFormat detect_format(std::string_view bytes, std::string_view path_hint) {
  if (path_hint.size() >= 4 && path_hint.substr(path_hint.size() - 4) == ".csv") {
    return InputFormat::tabular;
  }
  if (path_hint.size() >= 5 && path_hint.substr(path_hint.size() - 5) == ".json") {
    return InputFormat::structured;
  }
  for (char c : bytes) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '{' ? InputFormat::structured : InputFormat::tabular;
  }
  return InputFormat::structured;
}

std::string write_model(const ModelDocument& document) {
  const FmecaModel& model = document.model;
  ordered_json root = ordered_json::object();
  root["version"] = document.format_version;

  ordered_json scales = ordered_json::object();
  for (Dimension d : kDimensions) {
    auto levels = ordered_json::array();
    for (const auto& level : model.scale(d).levels) {
      ordered_json entry = ordered_json::object();
      entry["rank"] = level.rank;
      entry["label"] = level.label;
      if (!level.description.empty()) entry["description"] = level.description;
      levels.push_back(std::move(entry));
    }
    scales[std::string(dimension_name(d))] = std::move(levels);
  }
  root["scales"] = std::move(scales);

  std::vector<Component> components = model.components;
  std::sort(components.begin(), components.end(),
            [](const Component& a, const Component& b) { return a.id < b.id; });
  auto components_json = ordered_json::array();
  for (const auto& component : components) {
    ordered_json entry = ordered_json::object();
    entry["id"] = component.id;
    if (!component.name.empty() && component.name != component.id) {
      entry["name"] = component.name;
    }
    if (!component.function.empty()) entry["function"] = component.function;
    if (component.default_critical_threshold) {
      entry["critical_threshold"] = *component.default_critical_threshold;
    }
    components_json.push_back(std::move(entry));
  }
  root["components"] = std::move(components_json);

  std::vector<FailureMode> failure_modes = model.failure_modes;
  std::sort(failure_modes.begin(), failure_modes.end(),
            [](const FailureMode& a, const FailureMode& b) { return a.id < b.id; });
  auto failure_modes_json = ordered_json::array();
  for (const auto& fm : failure_modes) {
    ordered_json entry = ordered_json::object();
    entry["id"] = fm.id;
    if (!fm.component_id.empty()) entry["component"] = fm.component_id;
    if (!fm.description.empty()) entry["description"] = fm.description;
    if (!fm.causes.empty()) entry["causes"] = fm.causes;
    if (!fm.effects.empty()) entry["effects"] = fm.effects;
    entry["severity"] = fm.severity.value;
    entry["occurrence"] = fm.occurrence.value;
    entry["detectability"] = fm.detectability.value;
    entry["critical_threshold"] = fm.critical_threshold;
    std::vector<std::string> recommended = fm.recommended_action_ids;
    std::sort(recommended.begin(), recommended.end());
    recommended.erase(std::unique(recommended.begin(), recommended.end()), recommended.end());
    entry["recommended_actions"] = recommended;
    if (!fm.alternative_groups.empty()) {
      std::vector<std::vector<std::string>> groups = fm.alternative_groups;
      for (auto& group : groups) std::sort(group.begin(), group.end());
      std::sort(groups.begin(), groups.end());
      entry["alternative_groups"] = groups;
    }
    failure_modes_json.push_back(std::move(entry));
  }
  root["failure_modes"] = std::move(failure_modes_json);

  std::vector<PreventiveAction> actions = model.actions;
  std::sort(actions.begin(), actions.end(),
            [](const PreventiveAction& a, const PreventiveAction& b) { return a.id < b.id; });
  auto actions_json = ordered_json::array();
  for (const auto& action : actions) {
    ordered_json entry = ordered_json::object();
    entry["id"] = action.id;
    if (!action.description.empty()) entry["description"] = action.description;
    entry["cost"] = action.cost.str();
    ordered_json mitigations = ordered_json::object();
    for (const auto& [fm_id, effect] : action.mitigations) {
      ordered_json effect_json = ordered_json::object();
      if (effect.severity != 0) effect_json["severity"] = effect.severity;
      if (effect.occurrence != 0) effect_json["occurrence"] = effect.occurrence;
      if (effect.detectability != 0) effect_json["detectability"] = effect.detectability;
      mitigations[fm_id] = std::move(effect_json);
    }
    if (!mitigations.empty()) entry["mitigations"] = std::move(mitigations);
    actions_json.push_back(std::move(entry));
  }
  root["actions"] = std::move(actions_json);

  root["budget"] = model.budget.str();
  if (!document.metadata.empty()) {
    ordered_json metadata = ordered_json::object();
    for (const auto& [key, value] : document.metadata) metadata[key] = value;
    root["metadata"] = std::move(metadata);
  }
  return root.dump(2) + "\n";
}

std::string model_digest(const FmecaModel& model) {
  ModelDocument bare;
  bare.model = model;
  std::string canonical = write_model(bare);
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

}  // namespace fmeca::ingest
