#include "fmeca/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace fmeca {

std::string_view dimension_name(Dimension dimension) {
  switch (dimension) {
    case Dimension::severity: return "severity";
    case Dimension::occurrence: return "occurrence";
    case Dimension::detectability: return "detectability";
  }
  throw std::logic_error("unknown dimension");
}

int RatingScale::min_rank() const {
  return levels.empty() ? 1 : levels.front().rank;
}

int RatingScale::max_rank() const {
  return levels.empty() ? 1 : levels.back().rank;
}

std::optional<int> RatingScale::rank_for_label(std::string_view label) const {
  for (const auto& l : levels) {
    if (l.label == label) return l.rank;
  }
  // Case-insensitive fallback so spreadsheet exports with differing casing
  // still resolve.
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  std::string wanted = lower(label);
  for (const auto& l : levels) {
    if (lower(l.label) == wanted) return l.rank;
  }
  return std::nullopt;
}

const ScaleLevel* RatingScale::level(int rank) const {
  for (const auto& l : levels) {
    if (l.rank == rank) return &l;
  }
  return nullptr;
}

RatingScale default_scale(Dimension dimension) {
  RatingScale scale;
  scale.dimension = dimension;
  auto add = [&scale](int rank, std::string label) {
    scale.levels.push_back({rank, std::move(label), ""});
  };
  switch (dimension) {
    case Dimension::severity:
      add(1, "Negligible");
      add(2, "Significant");
      add(3, "Critical");
      add(4, "Catastrophic");
      break;
    case Dimension::occurrence:
      add(1, "Very Low");
      add(2, "Low");
      add(3, "Medium");
      add(4, "High");
      break;
    case Dimension::detectability:
      add(1, "High");
      add(2, "Medium");
      add(3, "Low");
      add(4, "Very Low");
      break;
  }
  return scale;
}

int MitigationEffect::delta(Dimension dimension) const {
  switch (dimension) {
    case Dimension::severity: return severity;
    case Dimension::occurrence: return occurrence;
    case Dimension::detectability: return detectability;
  }
  throw std::logic_error("unknown dimension");
}

Rank FailureMode::rank(Dimension dimension) const {
  switch (dimension) {
    case Dimension::severity: return severity;
    case Dimension::occurrence: return occurrence;
    case Dimension::detectability: return detectability;
  }
  throw std::logic_error("unknown dimension");
}

const RatingScale& FmecaModel::scale(Dimension dimension) const {
  return scales[static_cast<size_t>(dimension)];
}

RatingScale& FmecaModel::scale(Dimension dimension) {
  return scales[static_cast<size_t>(dimension)];
}

const Component* FmecaModel::component(std::string_view id) const {
  for (const auto& c : components) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const FailureMode* FmecaModel::failure_mode(std::string_view id) const {
  for (const auto& fm : failure_modes) {
    if (fm.id == id) return &fm;
  }
  return nullptr;
}

const PreventiveAction* FmecaModel::action(std::string_view id) const {
  for (const auto& a : actions) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

int FmecaModel::min_criticality() const {
  int product = 1;
  for (Dimension d : kDimensions) product *= scale(d).min_rank();
  return product;
}

int FmecaModel::max_criticality() const {
  int product = 1;
  for (Dimension d : kDimensions) product *= scale(d).max_rank();
  return product;
}

std::vector<std::string> FmecaModel::recommending_failure_modes(std::string_view action_id) const {
  std::vector<std::string> out;
  for (const auto& fm : failure_modes) {
    if (std::find(fm.recommended_action_ids.begin(), fm.recommended_action_ids.end(),
                  action_id) != fm.recommended_action_ids.end()) {
      out.push_back(fm.id);
    }
  }
  return out;
}

}  // namespace fmeca
