#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <stdexcept>

#include "fmeca/core.hpp"
#include "fmeca/generator.hpp"

using namespace fmeca;

namespace {

/// One failure mode (S=3, O=2, D=1, threshold 2) with two actions that are
/// both needed to reach the threshold; costs 7 and 10, budget 20.
FmecaModel sample_model() {
  FmecaModel model;
  Component generator;
  generator.id = "Generator";
  generator.name = "Generator";
  generator.function = "Generate current";
  model.components.push_back(generator);

  FailureMode fm;
  fm.id = "F1";
  fm.component_id = "Generator";
  fm.description = "No current from Generator";
  fm.severity = Rank{3};
  fm.occurrence = Rank{2};
  fm.detectability = Rank{1};
  fm.critical_threshold = 2;
  fm.recommended_action_ids = {"A1", "A2"};
  model.failure_modes.push_back(fm);

  PreventiveAction robust;
  robust.id = "A1";
  robust.description = "Use of robust components";
  robust.cost = Rational(7);
  robust.mitigations.emplace("F1", MitigationEffect{0, 1, 0});
  model.actions.push_back(robust);

  PreventiveAction redundancy;
  redundancy.id = "A2";
  redundancy.description = "Introduction of hardware redundancy";
  redundancy.cost = Rational(10);
  redundancy.mitigations.emplace("F1", MitigationEffect{1, 0, 0});
  model.actions.push_back(redundancy);

  model.budget = Rational(20);
  return model;
}

}  // namespace

TEST_CASE("criticality is the rank product") {
  CHECK(criticality(Rank{1}, Rank{1}, Rank{1}) == 1);
  CHECK(criticality(Rank{4}, Rank{4}, Rank{4}) == 64);
  CHECK(criticality(Rank{3}, Rank{2}, Rank{1}) == 6);

  // Exhaustive over the default 1..4 scale.
  for (int s = 1; s <= 4; ++s) {
    for (int o = 1; o <= 4; ++o) {
      for (int d = 1; d <= 4; ++d) {
        CHECK(criticality(Rank{s}, Rank{o}, Rank{d}) == s * o * d);
      }
    }
  }
}

TEST_CASE("scale-checked criticality rejects out-of-scale ranks") {
  FmecaModel model = sample_model();
  CHECK(criticality(model, Rank{3}, Rank{2}, Rank{1}) == 6);
  CHECK_THROWS_AS(criticality(model, Rank{5}, Rank{2}, Rank{1}), std::out_of_range);
  CHECK_THROWS_AS(criticality(model, Rank{3}, Rank{0}, Rank{1}), std::out_of_range);
}

TEST_CASE("residual ranks apply clamped reductions") {
  FmecaModel model = sample_model();
  const FailureMode& fm = model.failure_modes[0];

  RankTriple empty = residual_ranks(model, fm, {});
  CHECK(empty == RankTriple{Rank{3}, Rank{2}, Rank{1}});

  RankTriple one = residual_ranks(model, fm, {"A1"});
  CHECK(one == RankTriple{Rank{3}, Rank{1}, Rank{1}});

  // Oversized reductions clamp at the scale minimum.
  model.actions[0].mitigations["F1"] = MitigationEffect{2, 5, 0};
  RankTriple clamped = residual_ranks(model, fm, {"A1"});
  CHECK(clamped == RankTriple{Rank{1}, Rank{1}, Rank{1}});
  CHECK(residual_criticality(model, fm, {"A1"}) == 1);
}

TEST_CASE("residual criticality composes the product") {
  FmecaModel model = sample_model();
  const FailureMode& fm = model.failure_modes[0];
  CHECK(residual_criticality(model, fm, {}) == 6);
  CHECK(residual_criticality(model, fm, {"A1"}) == 3);
  CHECK(residual_criticality(model, fm, {"A1", "A2"}) == 2);

  // A deeper severity cut drives (3,2,1) all the way to 1, which is below
  // the threshold of 2.
  model.actions[1].mitigations["F1"] = MitigationEffect{2, 0, 0};
  CHECK(residual_criticality(model, fm, {"A1", "A2"}) == 1);
  CHECK_FALSE(is_critical(model, fm, {"A1", "A2"}));
}

TEST_CASE("critical means strictly above the threshold") {
  FmecaModel model = sample_model();
  const FailureMode& fm = model.failure_modes[0];
  CHECK(is_critical(model, fm, {}));               // residual 6, threshold 2
  CHECK_FALSE(is_critical(model, fm, {"A1", "A2"}));  // residual 2 equals threshold
  model.failure_modes[0].critical_threshold = 6;
  CHECK_FALSE(is_critical(model, model.failure_modes[0], {}));
}

TEST_CASE("total cost counts each action once") {
  FmecaModel model = sample_model();
  CHECK(total_cost(model, {}) == Rational(0));
  CHECK(total_cost(model, {"A2"}) == Rational(10));
  CHECK(total_cost(model, {"A1", "A2"}) == Rational(17));
  CHECK_THROWS_AS(total_cost(model, {"A9"}), std::invalid_argument);

  // Shared by two failure modes: still 17, not 34. (Relation type 4 is
  // rejected by the validator but the cost rule holds regardless.)
  FmecaModel shared = sample_model();
  FailureMode second = shared.failure_modes[0];
  second.id = "F2";
  shared.failure_modes.push_back(second);
  shared.actions[0].mitigations.emplace("F2", MitigationEffect{0, 1, 0});
  shared.actions[1].mitigations.emplace("F2", MitigationEffect{1, 0, 0});
  CHECK(total_cost(shared, {"A1", "A2"}) == Rational(17));

  // Additive over disjoint selections.
  CHECK(total_cost(model, {"A1"}) + total_cost(model, {"A2"}) ==
        total_cost(model, {"A1", "A2"}));
}

TEST_CASE("objective orders violations, excess, cost") {
  FmecaModel model = sample_model();

  Objective empty = objective(model, {});
  CHECK(empty.violations == 1);
  CHECK(empty.excess == 4);  // residual 6 vs threshold 2
  CHECK(empty.cost == Rational(0));

  Objective both = objective(model, {"A1", "A2"});
  CHECK(both.violations == 0);
  CHECK(both.excess == 0);
  CHECK(both.cost == Rational(17));

  CHECK(both < empty);  // lexicographic: fewer violations wins
  CHECK(Objective{0, 0, Rational(5)} < Objective{0, 1, Rational(1)});
  CHECK(Objective{0, 0, Rational(5)} < Objective{0, 0, Rational(6)});

  Configuration config = evaluate(model, {"A1", "A2"});
  CHECK(config.feasible(model.budget));
  CHECK(config.total_cost == Rational(17));
  REQUIRE(config.outcomes.size() == 1);
  CHECK(config.outcomes[0].initial_criticality == 6);
  CHECK(config.outcomes[0].residual_criticality == 2);
  CHECK_FALSE(config.outcomes[0].critical);
  CHECK(config.outcomes[0].selected_action_ids == std::vector<std::string>{"A1", "A2"});
}

TEST_CASE("validate accepts the sample and stays pure") {
  FmecaModel model = sample_model();
  auto first = validate(model);
  CHECK_FALSE(has_errors(first));
  auto second = validate(model);
  REQUIRE(first.size() == second.size());
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].code == second[i].code);
    CHECK(first[i].message == second[i].message);
  }
}

TEST_CASE("validate flags broken references") {
  FmecaModel model = sample_model();
  model.actions[0].mitigations.emplace("F9", MitigationEffect{0, 1, 0});
  auto diagnostics = validate(model);
  CHECK(has_errors(diagnostics));
  bool found = false;
  for (const auto& d : diagnostics) found |= d.code == "unknown-failure-mode";
  CHECK(found);
}

TEST_CASE("validate flags unsupported relation types") {
  FmecaModel type3 = sample_model();
  type3.failure_modes[0].alternative_groups.push_back({"A1", "A2"});
  bool found3 = false;
  for (const auto& d : validate(type3)) found3 |= d.code == "relation-type-3-unsupported";
  CHECK(found3);

  FmecaModel type4 = sample_model();
  FailureMode second = type4.failure_modes[0];
  second.id = "F2";
  second.recommended_action_ids = {"A1"};
  type4.failure_modes.push_back(second);
  type4.actions[0].mitigations.emplace("F2", MitigationEffect{0, 1, 0});
  bool found4 = false;
  for (const auto& d : validate(type4)) found4 |= d.code == "relation-type-4-unsupported";
  CHECK(found4);
}

TEST_CASE("validate warns without rejecting") {
  FmecaModel model = sample_model();
  model.actions[0].mitigations["F1"] = MitigationEffect{0, 0, 0};  // zero effect
  model.failure_modes[0].critical_threshold = 100;                 // outside 1..64
  auto diagnostics = validate(model);
  CHECK_FALSE(has_errors(diagnostics));
  int warnings = 0;
  for (const auto& d : diagnostics) {
    if (d.level == DiagnosticLevel::warning) ++warnings;
  }
  CHECK(warnings >= 2);
}

TEST_CASE("validate flags rank and budget errors") {
  FmecaModel model = sample_model();
  model.failure_modes[0].severity = Rank{5};
  model.budget = Rational(-1);
  auto diagnostics = validate(model);
  bool rank = false, budget = false;
  for (const auto& d : diagnostics) {
    rank |= d.code == "rank-out-of-scale";
    budget |= d.code == "negative-budget";
  }
  CHECK(rank);
  CHECK(budget);
}

TEST_CASE("empty selection objective counts initially critical failure modes") {
  gen::SplitMix64 rng(13);
  for (int instance = 0; instance < 20; ++instance) {
    gen::GenParams params;
    params.failure_modes = 1 + static_cast<int>(rng.below(8));
    params.actions = 1 + static_cast<int>(rng.below(10));
    params.seed = rng.next();
    FmecaModel model = gen::generate(params).model;

    Objective empty = objective(model, {});
    CHECK(empty.cost == Rational(0));
    int initially_critical = 0;
    for (const auto& fm : model.failure_modes) {
      if (initial_criticality(fm) > fm.critical_threshold) ++initially_critical;
    }
    CHECK(empty.violations == initially_critical);
  }
}

TEST_CASE("monotonicity: adding actions never raises residual criticality") {
  gen::SplitMix64 rng(7);
  for (int instance = 0; instance < 20; ++instance) {
    gen::GenParams params;
    params.failure_modes = 1 + static_cast<int>(rng.below(4));
    params.actions = 2 + static_cast<int>(rng.below(8));
    params.seed = rng.next();
    FmecaModel model = gen::generate(params).model;

    for (int trial = 0; trial < 20; ++trial) {
      std::set<std::string> small, large;
      for (const auto& action : model.actions) {
        if (rng.below(2) == 0) {
          large.insert(action.id);
          if (rng.below(2) == 0) small.insert(action.id);
        }
      }
      for (const auto& fm : model.failure_modes) {
        CHECK(residual_criticality(model, fm, large) <= residual_criticality(model, fm, small));
        RankTriple residual = residual_ranks(model, fm, large);
        for (Dimension d : kDimensions) {
          CHECK(residual.rank(d).value >= model.scale(d).min_rank());
          CHECK(residual.rank(d).value <= fm.rank(d).value);
        }
      }
    }
  }
}
