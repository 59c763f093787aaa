#include "fmeca/generator.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "fmeca/core.hpp"

namespace fmeca::gen {

namespace {

std::string padded_id(const char* prefix, int index, int total) {
  int width = total >= 100 ? 3 : 2;
  std::string digits = std::to_string(index);
  while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
  return std::string(prefix) + digits;
}

/// Smallest rank reductions that push the product to the threshold or
/// below: repeatedly lower the largest remaining rank.
std::array<int, 3> needed_reductions(std::array<int, 3> ranks, int threshold) {
  std::array<int, 3> reduction = {0, 0, 0};
  while (ranks[0] * ranks[1] * ranks[2] > threshold) {
    size_t largest = 0;
    for (size_t i = 1; i < 3; ++i) {
      if (ranks[i] > ranks[largest]) largest = i;
    }
    if (ranks[largest] <= 1) break;
    ranks[largest] -= 1;
    reduction[largest] += 1;
  }
  return reduction;
}

}  // namespace

ingest::ModelDocument generate(const GenParams& params) {
  if (params.failure_modes < 1 || params.actions < 1) {
    throw std::invalid_argument("generator needs at least one failure mode and one action");
  }
  SplitMix64 rng(params.seed ^ 0x5eedf00dULL);

  ingest::ModelDocument doc;
  FmecaModel& model = doc.model;
  const int n = params.failure_modes;
  const int m = params.actions;

  int component_count = 1 + (n - 1) / 3;
  for (int c = 0; c < component_count; ++c) {
    Component component;
    component.id = padded_id("SYS-", c + 1, component_count);
    component.name = component.id;
    component.function = "subsystem " + std::to_string(c + 1);
    model.components.push_back(std::move(component));
  }

  // Each action belongs to exactly one failure mode (relation types 1-2).
  std::vector<std::vector<int>> actions_of(static_cast<size_t>(n));
  for (int a = 0; a < m; ++a) {
    int owner = a < n ? a : static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    actions_of[static_cast<size_t>(owner)].push_back(a);
  }

  std::vector<PreventiveAction> actions(static_cast<size_t>(m));
  std::int64_t planted_cents = 0;

  for (int f = 0; f < n; ++f) {
    FailureMode fm;
    fm.id = padded_id("FM-", f + 1, n);
    fm.component_id = model.components[static_cast<size_t>(f) % model.components.size()].id;
    fm.description = "failure mode " + std::to_string(f + 1);

    const std::vector<int>& owned = actions_of[static_cast<size_t>(f)];
    bool critical = !owned.empty() && rng.below(5) != 0;  // most owning modes start violated

    if (critical) {
      fm.severity = Rank{rng.range(2, 4)};
      fm.occurrence = Rank{rng.range(1, 4)};
      fm.detectability = Rank{rng.range(1, 4)};
      int c = initial_criticality(fm);
      fm.critical_threshold = rng.range(1, c - 1);
    } else {
      fm.severity = Rank{rng.range(1, 3)};
      fm.occurrence = Rank{rng.range(1, 3)};
      fm.detectability = Rank{rng.range(1, 2)};
      int c = initial_criticality(fm);
      fm.critical_threshold = rng.range(c, model.max_criticality());
    }

    std::array<int, 3> reduction = {0, 0, 0};
    if (critical) {
      reduction = needed_reductions(
          {fm.severity.value, fm.occurrence.value, fm.detectability.value},
          fm.critical_threshold);
    }
    int total_reduction = reduction[0] + reduction[1] + reduction[2];

    // Planted cover: a few of the owned actions jointly supply the needed
    // reductions; the rest are distractors with weaker effects.
    int planted_count = 0;
    if (critical && total_reduction > 0) {
      planted_count = std::min({static_cast<int>(owned.size()), total_reduction, 3});
      planted_count = std::max(planted_count, 1);
      if (planted_count > 1) planted_count = rng.range(1, planted_count);
    }
    std::vector<int> order = owned;
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }

    for (size_t slot = 0; slot < owned.size(); ++slot) {
      int index = order[slot];
      PreventiveAction& action = actions[static_cast<size_t>(index)];
      action.id = padded_id("ACT-", index + 1, m);
      action.description = "preventive action " + std::to_string(index + 1);

      MitigationEffect effect;
      if (static_cast<int>(slot) < planted_count) {
        // Spread the needed reductions over the planted actions, at least
        // one unit each.
        std::array<int, 3> share = {0, 0, 0};
        int remaining_slots = planted_count - static_cast<int>(slot);
        for (size_t d = 0; d < 3; ++d) {
          if (remaining_slots == 1) {
            share[d] = reduction[d];
            reduction[d] = 0;
          } else {
            for (int unit = 0; unit < reduction[d]; ++unit) {
              if (rng.below(static_cast<std::uint64_t>(remaining_slots)) == 0) share[d] += 1;
            }
            reduction[d] -= share[d];
          }
        }
        if (share[0] + share[1] + share[2] == 0) {
          for (size_t d = 0; d < 3; ++d) {
            if (reduction[d] > 0) {
              share[d] = 1;
              reduction[d] -= 1;
              break;
            }
          }
        }
        effect.severity = share[0];
        effect.occurrence = share[1];
        effect.detectability = share[2];
      } else {
        // Distractor: one unit in a random dimension.
        switch (rng.below(3)) {
          case 0: effect.severity = 1; break;
          case 1: effect.occurrence = 1; break;
          default: effect.detectability = 1; break;
        }
      }
      if (effect.is_zero()) effect.occurrence = 1;

      int total_delta = effect.severity + effect.occurrence + effect.detectability;
      std::int64_t cents =
          static_cast<std::int64_t>(150 + rng.below(200)) * total_delta +
          static_cast<std::int64_t>(rng.below(300));
      action.cost = Rational(cents, 100);
      action.mitigations.emplace(fm.id, effect);
      fm.recommended_action_ids.push_back(action.id);
      if (static_cast<int>(slot) < planted_count) planted_cents += cents;
    }
    std::sort(fm.recommended_action_ids.begin(), fm.recommended_action_ids.end());
    model.failure_modes.push_back(std::move(fm));
  }
  model.actions = std::move(actions);

  std::int64_t budget_cents;
  if (params.feasible) {
    int slack_pct = 115 + static_cast<int>(rng.below(46));  // 115..160
    budget_cents = (planted_cents * slack_pct + 99) / 100;
    if (budget_cents == 0) budget_cents = 1000;
  } else {
    int pct = 50 + static_cast<int>(rng.below(91));  // 50..140
    budget_cents = (planted_cents * pct + 99) / 100;
    if (budget_cents == 0) budget_cents = 500;
  }
  model.budget = Rational(budget_cents, 100);

  doc.metadata["generator"] = "fmeca gen";
  doc.metadata["seed"] = std::to_string(params.seed);
  doc.metadata["shape"] = std::to_string(n) + "x" + std::to_string(m);
  if (params.feasible) doc.metadata["planted"] = "feasible";
  return doc;
}

}  // namespace fmeca::gen
