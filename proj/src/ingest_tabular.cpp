#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "fmeca/core.hpp"
#include "ingest_internal.hpp"

namespace fmeca::ingest::detail {

namespace {

struct Cell {
  std::string text;
  SourcePos pos;
};

using Row = std::vector<Cell>;

std::string trim(std::string_view s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

/// RFC4180-style reader: quoted fields may contain commas, doubled quotes
/// and newlines. Unquoted field text is trimmed.
std::vector<Row> read_rows(std::string_view bytes, int first_line,
                           std::vector<Diagnostic>& diagnostics) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  SourcePos field_pos{first_line, 1};
  SourcePos pos{first_line, 1};
  bool quoted = false;
  bool was_quoted = false;
  bool field_open = false;

  auto advance = [&pos](char c) {
    if (c == '\n') {
      pos.line += 1;
      pos.column = 1;
    } else {
      pos.column += 1;
    }
  };
  auto end_field = [&]() {
    row.push_back(Cell{was_quoted ? field : trim(field), field_pos});
    field.clear();
    was_quoted = false;
    field_open = false;
  };
  auto end_row = [&]() {
    end_field();
    bool blank = row.size() == 1 && row[0].text.empty();
    if (!blank) rows.push_back(row);
    row.clear();
  };

  for (size_t i = 0; i < bytes.size(); ++i) {
    char c = bytes[i];
    if (!field_open) {
      field_pos = pos;
      field_open = true;
    }
    if (quoted) {
      if (c == '"') {
        if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
          field += '"';
          advance(c);
          advance(bytes[++i]);
          continue;
        }
        quoted = false;
        advance(c);
        continue;
      }
      field += c;
      advance(c);
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty()) {
          quoted = true;
          was_quoted = true;
        } else {
          field += c;
        }
        advance(c);
        break;
      case ',':
        end_field();
        advance(c);
        break;
      case '\r':
        advance(c);
        break;
      case '\n':
        end_row();
        advance(c);
        break;
      default:
        field += c;
        advance(c);
        break;
    }
  }
  if (quoted) {
    diagnostics.push_back(Diagnostic{DiagnosticLevel::error, "syntax-error",
                                     "unterminated quoted field", field_pos});
  }
  if (field_open || !row.empty()) end_row();
  return rows;
}

/// Returns the byte offset of the first invalid UTF-8 sequence, if any.
std::optional<size_t> first_invalid_utf8(std::string_view bytes) {
  size_t i = 0;
  while (i < bytes.size()) {
    unsigned char c = static_cast<unsigned char>(bytes[i]);
    size_t len;
    unsigned min_code;
    if (c < 0x80) {
      i += 1;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      min_code = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      min_code = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      min_code = 0x10000;
    } else {
      return i;
    }
    if (i + len > bytes.size()) return i;
    unsigned code = c & (0xFF >> (len + 1));
    for (size_t j = 1; j < len; ++j) {
      unsigned char cont = static_cast<unsigned char>(bytes[i + j]);
      if ((cont & 0xC0) != 0x80) return i;
      code = (code << 6) | (cont & 0x3F);
    }
    if (code < min_code || code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF)) return i;
    i += len;
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 17> kColumns = {
    "Component", "Function", "Failure Mode ID", "Failure Mode", "Causes",  "Effects",
    "S",         "O",        "D",               "Criticality",  "Threshold",
    "Action ID", "Action",   "Cost",            "Delta S",      "Delta O", "Delta D"};

struct Columns {
  std::map<std::string, size_t> index;
  const Cell* cell(const Row& row, std::string_view name) const {
    auto it = index.find(std::string(name));
    if (it == index.end() || it->second >= row.size()) return nullptr;
    return &row[it->second];
  }
  std::string text(const Row& row, std::string_view name) const {
    const Cell* c = cell(row, name);
    return c ? c->text : std::string();
  }
};

struct TabularContext {
  std::vector<Diagnostic>& diagnostics;
  ParseMode mode;

  void error(std::string code, std::string message, std::optional<SourcePos> pos) {
    diagnostics.push_back(
        Diagnostic{DiagnosticLevel::error, std::move(code), std::move(message), pos});
  }
  void warn(std::string code, std::string message, std::optional<SourcePos> pos) {
    diagnostics.push_back(
        Diagnostic{DiagnosticLevel::warning, std::move(code), std::move(message), pos});
  }
  void strictness(std::string code, std::string message, std::optional<SourcePos> pos) {
    if (mode == ParseMode::strict) {
      error(std::move(code), std::move(message), pos);
    } else {
      warn(std::move(code), std::move(message), pos);
    }
  }
};

std::optional<int> parse_int(const std::string& text) {
  if (text.empty()) return std::nullopt;
  size_t pos = 0;
  bool negative = false;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  if (pos == text.size()) return std::nullopt;
  long value = 0;
  for (; pos < text.size(); ++pos) {
    if (text[pos] < '0' || text[pos] > '9') return std::nullopt;
    value = value * 10 + (text[pos] - '0');
    if (value > 1000000000L) return std::nullopt;
  }
  return static_cast<int>(negative ? -value : value);
}

std::optional<Rank> parse_rank_cell(TabularContext& ctx, const Cell& cell,
                                    const RatingScale& scale, const std::string& fm_id) {
  std::string dim(dimension_name(scale.dimension));
  if (auto value = parse_int(cell.text)) {
    if (!scale.contains(*value)) {
      // Message mirrors validate() so merged diagnostics deduplicate.
      ctx.error("rank-out-of-scale",
                "failure mode \"" + fm_id + "\": " + dim + " rank " + std::to_string(*value) +
                    " outside scale [" + std::to_string(scale.min_rank()) + "," +
                    std::to_string(scale.max_rank()) + "]",
                cell.pos);
      return std::nullopt;
    }
    return Rank{*value};
  }
  if (auto rank = scale.rank_for_label(cell.text)) return Rank{*rank};
  ctx.error("unknown-rank-label",
            "failure mode \"" + fm_id + "\": unknown " + dim + " label \"" + cell.text + "\"",
            cell.pos);
  return std::nullopt;
}

}  // namespace

ParseResult parse_tabular(std::string_view bytes, ParseMode mode) {
  ParseResult result;
  TabularContext ctx{result.diagnostics, mode};
  ModelDocument doc;

  if (auto bad = first_invalid_utf8(bytes)) {
    ctx.error("invalid-utf8", "input is not valid UTF-8", position_from_offset(bytes, *bad));
    return result;
  }

  // Directive lines ("# key: value") may precede the header row.
  size_t offset = 0;
  int line_no = 0;
  bool budget_seen = false;
  while (offset < bytes.size()) {
    size_t eol = bytes.find('\n', offset);
    std::string_view raw = bytes.substr(offset, eol == std::string_view::npos ? std::string_view::npos
                                                                              : eol - offset);
    std::string line = trim(raw);
    if (!line.empty() && line[0] != '#') break;
    line_no += 1;
    offset = eol == std::string_view::npos ? bytes.size() : eol + 1;
    if (line.empty()) continue;

    std::string body = trim(line.substr(1));
    size_t colon = body.find(':');
    SourcePos pos{line_no, 1};
    if (colon == std::string::npos) {
      ctx.strictness("unknown-directive", "directive without ':': \"" + line + "\"", pos);
      continue;
    }
    std::string key = trim(body.substr(0, colon));
    std::string value = trim(body.substr(colon + 1));
    if (key == "budget") {
      if (auto budget = Rational::parse(value)) {
        doc.model.budget = *budget;
        budget_seen = true;
      } else {
        ctx.error("bad-number", "budget directive is not a valid rational: \"" + value + "\"",
                  pos);
        budget_seen = true;
      }
    } else if (key == "version") {
      doc.format_version = value;
      if (value != "1") {
        ctx.error("version-mismatch", "unsupported format version \"" + value + "\"", pos);
      }
    } else if (key.size() > 5 && key.substr(0, 5) == "meta.") {
      doc.metadata[key.substr(5)] = value;
    } else {
      ctx.strictness("unknown-directive", "unknown directive \"" + key + "\"", pos);
    }
  }
  if (!budget_seen) {
    ctx.strictness("missing-budget", "no \"# budget:\" directive before the header row",
                   std::nullopt);
  }

  std::vector<Row> rows = read_rows(bytes.substr(offset), line_no + 1, result.diagnostics);
  if (rows.empty()) {
    ctx.error("missing-header", "no header row found", std::nullopt);
    return result;
  }

  Columns columns;
  const Row& header = rows.front();
  for (size_t i = 0; i < header.size(); ++i) {
    std::string_view name = header[i].text;
    if (std::find(kColumns.begin(), kColumns.end(), name) == kColumns.end()) {
      ctx.strictness("unknown-column", "unknown column \"" + header[i].text + "\"",
                     header[i].pos);
      continue;
    }
    columns.index[header[i].text] = i;
  }
  for (std::string_view name : kColumns) {
    if (columns.index.count(std::string(name)) == 0) {
      ctx.error("missing-column", "missing required column \"" + std::string(name) + "\"",
                header.front().pos);
    }
  }
  if (has_errors(result.diagnostics)) {
    result.document = std::move(doc);
    return result;
  }

  std::map<std::string, size_t> fm_index;       // id -> index in failure_modes
  std::map<std::string, size_t> action_index;   // id -> index in actions
  std::map<std::string, SourcePos> component_seen;

  for (size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    SourcePos row_pos = row.front().pos;
    if (row.size() != header.size()) {
      ctx.strictness("wrong-field-count",
                     "row has " + std::to_string(row.size()) + " fields, header has " +
                         std::to_string(header.size()),
                     row_pos);
      if (mode == ParseMode::strict) continue;
    }

    std::string fm_id = columns.text(row, "Failure Mode ID");
    if (fm_id.empty()) {
      ctx.error("missing-id", "row without a failure mode id", row_pos);
      continue;
    }

    std::string component_id = columns.text(row, "Component");
    std::string function = columns.text(row, "Function");
    if (!component_id.empty()) {
      auto seen = component_seen.find(component_id);
      if (seen == component_seen.end()) {
        component_seen.emplace(component_id, row_pos);
        Component component;
        component.id = component_id;
        component.name = component_id;
        component.function = function;
        doc.model.components.push_back(std::move(component));
      } else {
        for (auto& existing : doc.model.components) {
          if (existing.id == component_id && existing.function != function) {
            ctx.error("inconsistent-row",
                      "component \"" + component_id + "\" listed with a different function",
                      row_pos);
          }
        }
      }
    }

    auto fm_it = fm_index.find(fm_id);
    if (fm_it == fm_index.end()) {
      FailureMode fm;
      fm.id = fm_id;
      fm.component_id = component_id;
      fm.description = columns.text(row, "Failure Mode");
      fm.causes = columns.text(row, "Causes");
      fm.effects = columns.text(row, "Effects");

      const std::array<std::pair<std::string_view, Dimension>, 3> rank_columns = {
          std::pair{std::string_view("S"), Dimension::severity},
          std::pair{std::string_view("O"), Dimension::occurrence},
          std::pair{std::string_view("D"), Dimension::detectability}};
      for (const auto& [column, dimension] : rank_columns) {
        const Cell* cell = columns.cell(row, column);
        if (cell == nullptr || cell->text.empty()) {
          ctx.error("missing-rank",
                    "failure mode \"" + fm_id + "\": empty " +
                        std::string(dimension_name(dimension)) + " cell",
                    cell ? cell->pos : row_pos);
          continue;
        }
        if (auto rank = parse_rank_cell(ctx, *cell, doc.model.scale(dimension), fm_id)) {
          switch (dimension) {
            case Dimension::severity: fm.severity = *rank; break;
            case Dimension::occurrence: fm.occurrence = *rank; break;
            case Dimension::detectability: fm.detectability = *rank; break;
          }
        }
      }

      const Cell* threshold = columns.cell(row, "Threshold");
      if (threshold == nullptr || threshold->text.empty()) {
        ctx.error("missing-threshold", "failure mode \"" + fm_id + "\": empty Threshold cell",
                  row_pos);
      } else if (auto value = parse_int(threshold->text)) {
        fm.critical_threshold = *value;
      } else {
        ctx.error("bad-number",
                  "failure mode \"" + fm_id + "\": Threshold \"" + threshold->text +
                      "\" is not an integer",
                  threshold->pos);
      }

      const Cell* stated = columns.cell(row, "Criticality");
      if (stated != nullptr && !stated->text.empty()) {
        auto value = parse_int(stated->text);
        int computed = initial_criticality(fm);
        if (!value || *value != computed) {
          ctx.strictness("criticality-mismatch",
                         "failure mode \"" + fm_id + "\": stated criticality \"" + stated->text +
                             "\" does not equal S*O*D = " + std::to_string(computed),
                         stated->pos);
        }
      }

      fm_index.emplace(fm_id, doc.model.failure_modes.size());
      doc.model.failure_modes.push_back(std::move(fm));
    } else {
      const FailureMode& existing = doc.model.failure_modes[fm_it->second];
      auto expect = [&](std::string_view column, const std::string& value) {
        std::string found = columns.text(row, column);
        if (found != value) {
          ctx.error("inconsistent-row",
                    "failure mode \"" + fm_id + "\": column \"" + std::string(column) +
                        "\" differs from its first occurrence",
                    row_pos);
        }
      };
      expect("Component", existing.component_id);
      expect("Failure Mode", existing.description);
      expect("Causes", existing.causes);
      expect("Effects", existing.effects);
    }

    std::string action_id = columns.text(row, "Action ID");
    if (action_id.empty()) {
      for (std::string_view column : {"Action", "Cost", "Delta S", "Delta O", "Delta D"}) {
        if (!columns.text(row, column).empty()) {
          ctx.error("missing-id", "row has action fields but no Action ID", row_pos);
          break;
        }
      }
      continue;
    }

    FailureMode& fm = doc.model.failure_modes[fm_index.at(fm_id)];
    if (std::find(fm.recommended_action_ids.begin(), fm.recommended_action_ids.end(),
                  action_id) != fm.recommended_action_ids.end()) {
      ctx.error("duplicate-row",
                "failure mode \"" + fm_id + "\" already has a row for action \"" + action_id +
                    "\"",
                row_pos);
      continue;
    }
    fm.recommended_action_ids.push_back(action_id);

    MitigationEffect effect;
    const std::array<std::pair<std::string_view, Dimension>, 3> delta_columns = {
        std::pair{std::string_view("Delta S"), Dimension::severity},
        std::pair{std::string_view("Delta O"), Dimension::occurrence},
        std::pair{std::string_view("Delta D"), Dimension::detectability}};
    for (const auto& [column, dimension] : delta_columns) {
      const Cell* cell = columns.cell(row, column);
      if (cell == nullptr || cell->text.empty()) continue;
      auto value = parse_int(cell->text);
      if (!value) {
        ctx.error("bad-number",
                  "action \"" + action_id + "\": " + std::string(column) + " \"" + cell->text +
                      "\" is not an integer",
                  cell->pos);
        continue;
      }
      switch (dimension) {
        case Dimension::severity: effect.severity = *value; break;
        case Dimension::occurrence: effect.occurrence = *value; break;
        case Dimension::detectability: effect.detectability = *value; break;
      }
    }

    std::string description = columns.text(row, "Action");
    const Cell* cost_cell = columns.cell(row, "Cost");
    std::optional<Rational> cost;
    if (cost_cell == nullptr || cost_cell->text.empty()) {
      ctx.error("missing-cost", "action \"" + action_id + "\": empty Cost cell", row_pos);
    } else {
      cost = Rational::parse(cost_cell->text);
      if (!cost) {
        ctx.error("bad-number",
                  "action \"" + action_id + "\": Cost \"" + cost_cell->text +
                      "\" is not a valid rational",
                  cost_cell->pos);
      }
    }

    auto action_it = action_index.find(action_id);
    if (action_it == action_index.end()) {
      PreventiveAction action;
      action.id = action_id;
      action.description = description;
      action.cost = cost.value_or(Rational(0));
      action.mitigations.emplace(fm_id, effect);
      action_index.emplace(action_id, doc.model.actions.size());
      doc.model.actions.push_back(std::move(action));
    } else {
      PreventiveAction& action = doc.model.actions[action_it->second];
      if (action.description != description) {
        ctx.error("inconsistent-row",
                  "action \"" + action_id + "\" listed with a different description", row_pos);
      }
      if (cost && action.cost != *cost) {
        ctx.error("inconsistent-row",
                  "action \"" + action_id + "\" listed with a different cost",
                  cost_cell ? cost_cell->pos : row_pos);
      }
      action.mitigations.emplace(fm_id, effect);
    }
  }

  result.document = std::move(doc);
  merge_validation(result);
  return result;
}

}  // namespace fmeca::ingest::detail
