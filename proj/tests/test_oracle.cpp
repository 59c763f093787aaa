#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fmeca/generator.hpp"
#include "fmeca/ingest.hpp"
#include "fmeca/oracle.hpp"
#include "fmeca/solver.hpp"

using namespace fmeca;
using oracle::exact_best;

namespace {

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
  fm.severity = Rank{3};
  fm.occurrence = Rank{2};
  fm.detectability = Rank{1};
  fm.critical_threshold = 2;
  fm.recommended_action_ids = {"A1", "A2"};
  model.failure_modes.push_back(fm);

  PreventiveAction robust;
  robust.id = "A1";
  robust.cost = Rational(7);
  robust.mitigations.emplace("F1", MitigationEffect{0, 1, 0});
  model.actions.push_back(robust);

  PreventiveAction redundancy;
  redundancy.id = "A2";
  redundancy.cost = Rational(10);
  redundancy.mitigations.emplace("F1", MitigationEffect{1, 0, 0});
  model.actions.push_back(redundancy);

  model.budget = Rational(20);
  return model;
}

}  // namespace

TEST_CASE("four-subset enumeration finds both actions") {
  // By hand: {} -> (1,4,0); {A1} -> (1,1,7); {A2} -> (1,2,10);
  // {A1,A2} -> (0,0,17). The only zero-violation subset wins.
  oracle::OracleResult result = exact_best(sample_model());
  CHECK(result.enumerated_count == 4);
  CHECK(result.optimal_objective == Objective{0, 0, Rational(17)});
  CHECK(result.optimal.selected_action_ids == std::set<std::string>{"A1", "A2"});
  CHECK(result.feasible_exists);
  CHECK(result.budget_best_objective == result.optimal_objective);
}

TEST_CASE("tight budget flips feasibility but not the safety optimum") {
  FmecaModel model = sample_model();
  model.budget = Rational(15);
  oracle::OracleResult result = exact_best(model);
  CHECK_FALSE(result.feasible_exists);
  CHECK(result.optimal_objective == Objective{0, 0, Rational(17)});
  // Within 15 the best available is the single cheapest mitigation.
  CHECK(result.budget_best_objective == Objective{1, 1, Rational(7)});
}

TEST_CASE("no initial violations: the empty selection dominates") {
  FmecaModel model = sample_model();
  model.failure_modes[0].critical_threshold = 6;
  oracle::OracleResult result = exact_best(model);
  CHECK(result.optimal_objective == Objective{0, 0, Rational(0)});
  CHECK(result.optimal.selected_action_ids.empty());
  CHECK(result.feasible_exists);
}

TEST_CASE("objective ties break toward fewer actions then ids") {
  FmecaModel model = sample_model();
  // A free action with no effect creates objective ties with and without it.
  PreventiveAction freebie;
  freebie.id = "A0";
  freebie.cost = Rational(0);
  freebie.mitigations.emplace("F1", MitigationEffect{0, 0, 0});
  model.actions.push_back(freebie);
  model.failure_modes[0].recommended_action_ids.push_back("A0");

  oracle::OracleResult result = exact_best(model);
  CHECK(result.optimal_objective == Objective{0, 0, Rational(17)});
  CHECK(result.optimal.selected_action_ids == std::set<std::string>{"A1", "A2"});
}

TEST_CASE("limit and unsupported relations are rejected") {
  FmecaModel model = sample_model();
  CHECK_THROWS_AS(exact_best(model, 1), std::invalid_argument);

  FmecaModel grouped = sample_model();
  grouped.failure_modes[0].alternative_groups.push_back({"A1", "A2"});
  CHECK_THROWS_AS(exact_best(grouped), std::invalid_argument);
}

TEST_CASE("pruned enumeration matches plain enumeration") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    gen::GenParams params;
    params.failure_modes = 1 + static_cast<int>(seed % 5);
    params.actions = 2 + static_cast<int>(seed % 9);
    params.seed = seed * 31 + 5;
    params.feasible = seed % 2 == 0;
    FmecaModel model = gen::generate(params).model;

    oracle::OracleResult plain = exact_best(model, 20, false);
    oracle::OracleResult pruned = exact_best(model, 20, true);
    CHECK(plain.optimal_objective == pruned.optimal_objective);
    CHECK(plain.optimal.selected_action_ids == pruned.optimal.selected_action_ids);
    CHECK(plain.budget_best_objective == pruned.budget_best_objective);
    CHECK(plain.budget_best.selected_action_ids == pruned.budget_best.selected_action_ids);
    CHECK(plain.feasible_exists == pruned.feasible_exists);
    CHECK(plain.enumerated_count ==
          std::uint64_t(1) << model.actions.size());
    CHECK(pruned.enumerated_count <= plain.enumerated_count);
  }
}

TEST_CASE("random configurations never beat the oracle") {
  gen::SplitMix64 rng(2024);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    gen::GenParams params;
    params.failure_modes = 2 + static_cast<int>(seed % 4);
    params.actions = 3 + static_cast<int>(seed % 7);
    params.seed = seed * 17 + 3;
    FmecaModel model = gen::generate(params).model;
    oracle::OracleResult best = exact_best(model);

    for (int trial = 0; trial < 200; ++trial) {
      std::set<std::string> random_pick;
      for (const auto& action : model.actions) {
        if (rng.below(2) == 0) random_pick.insert(action.id);
      }
      CHECK_FALSE(objective(model, random_pick) < best.optimal_objective);
    }
  }
}

TEST_CASE("compare reports gaps and asserts oracle optimality") {
  FmecaModel model = sample_model();
  oracle::OracleResult oracle_result = exact_best(model);
  std::string digest = ingest::model_digest(model);

  // Zero gap.
  oracle::GapReport zero =
      oracle::compare(Objective{0, 0, Rational(17)}, true, digest, oracle_result, digest);
  CHECK(zero.solver_optimal);
  CHECK(zero.cost_gap_abs == Rational(0));
  REQUIRE(zero.cost_gap_rel.has_value());
  CHECK(*zero.cost_gap_rel == Rational(0));
  CHECK(zero.feasibility_agreement);

  // An instance with two feasible covers of different cost: either action
  // alone meets threshold 4 ({A1} costs 10, {A2} costs 11). Handing compare
  // the pricier cover shows a ten percent gap.
  FmecaModel two_covers = sample_model();
  two_covers.failure_modes[0].critical_threshold = 4;
  two_covers.actions[0].cost = Rational(10);
  two_covers.actions[1].cost = Rational(11);
  oracle::OracleResult cover_oracle = exact_best(two_covers);
  CHECK(cover_oracle.optimal_objective == Objective{0, 0, Rational(10)});
  std::string cover_digest = ingest::model_digest(two_covers);
  Configuration pricier = evaluate(two_covers, {"A2"});
  CHECK(pricier.objective == Objective{0, 0, Rational(11)});
  oracle::GapReport gap =
      oracle::compare(pricier.objective, true, cover_digest, cover_oracle, cover_digest);
  CHECK_FALSE(gap.solver_optimal);
  CHECK(gap.cost_gap_abs == Rational(1));
  REQUIRE(gap.cost_gap_rel.has_value());
  CHECK(*gap.cost_gap_rel == Rational(1, 10));
  CHECK(gap.feasibility_agreement);

  // Digest mismatch and a "better than optimal" claim both throw.
  CHECK_THROWS_AS(
      oracle::compare(Objective{0, 0, Rational(17)}, true, digest, oracle_result, "ffff"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      oracle::compare(Objective{0, 0, Rational(1)}, true, digest, oracle_result, digest),
      std::logic_error);
}

TEST_CASE("infeasible instance: solver misses, oracle confirms, flags agree") {
  FmecaModel model = sample_model();
  model.budget = Rational(0);
  oracle::OracleResult oracle_result = exact_best(model);
  CHECK_FALSE(oracle_result.feasible_exists);

  amas::SolverResult solver_result = amas::run(model, {});
  std::string digest = ingest::model_digest(model);
  oracle::GapReport report =
      oracle::compare(solver_result.best.objective, solver_result.feasible_reached(model.budget),
                      digest, oracle_result, digest);
  CHECK(report.feasibility_agreement);
}

TEST_CASE("planted feasible instances are always feasible") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::GenParams params;
    params.failure_modes = 1 + static_cast<int>(seed % 8);
    params.actions = 3 + static_cast<int>(seed % 10);
    params.seed = seed * 7919;
    params.feasible = true;
    FmecaModel model = gen::generate(params).model;
    oracle::OracleResult result = exact_best(model, 20, true);
    CHECK(result.feasible_exists);
  }
}
