// Acceptance suite: one pass/fail line per criterion, exit 0 only when every
// criterion holds at its stated tolerance.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fmeca/core.hpp"
#include "fmeca/generator.hpp"
#include "fmeca/ingest.hpp"
#include "fmeca/oracle.hpp"
#include "fmeca/solver.hpp"
#include "fmeca/trace.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fmeca;
using Clock = std::chrono::steady_clock;

struct Check {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void require(bool condition, const std::string& why) {
    if (!condition) fail(why);
  }
  void note(const std::string& text) {
    if (pass && detail.empty()) detail = text;
  }
};

std::string samples_dir() {
  const char* dir = std::getenv("FMECA_SAMPLES");
  return dir ? dir : "samples";
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

FmecaModel load_sample_model() {
  auto parsed = ingest::parse_model(read_file(samples_dir() + "/train_detection.json"),
                                    ingest::InputFormat::structured);
  if (!parsed.ok()) throw std::runtime_error("sample model failed to parse");
  return parsed.document->model;
}

gen::GenParams instance_params(int index, int fm_lo, int fm_hi, int act_lo, int act_hi,
                               std::uint64_t seed_base, bool feasible) {
  gen::SplitMix64 rng(seed_base + static_cast<std::uint64_t>(index));
  gen::GenParams params;
  params.failure_modes = fm_lo + static_cast<int>(rng.below(
                                     static_cast<std::uint64_t>(fm_hi - fm_lo + 1)));
  params.actions =
      act_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(act_hi - act_lo + 1)));
  params.seed = rng.next();
  params.feasible = feasible;
  return params;
}

// --- criterion 1: criticality formula -------------------------------------

void criterion_1(Check& check) {
  for (int s = 1; s <= 4; ++s) {
    for (int o = 1; o <= 4; ++o) {
      for (int d = 1; d <= 4; ++d) {
        if (criticality(Rank{s}, Rank{o}, Rank{d}) != s * o * d) {
          check.fail("product mismatch at (" + std::to_string(s) + "," + std::to_string(o) +
                     "," + std::to_string(d) + ")");
        }
      }
    }
  }
  FmecaModel model = load_sample_model();
  const FailureMode& fm = model.failure_modes.at(0);
  check.require(initial_criticality(fm) == 6, "sample initial criticality must be 6");
  check.require(fm.critical_threshold == 2, "sample threshold must be 2");
  check.require(is_critical(model, fm, {}), "criticality 6 over threshold 2 must be critical");
  check.note("64/64 products exact; 6 > 2 flagged critical");
}

// --- criterion 2: oracle self-consistency ----------------------------------

void criterion_2(Check& check) {
  gen::SplitMix64 rng(0xacce55);
  int instances = 0;
  for (int i = 0; i < 200; ++i) {
    gen::GenParams params = instance_params(i, 1, 6, 1, 12, 7000, i % 2 == 0);
    FmecaModel model = gen::generate(params).model;
    ++instances;

    oracle::OracleResult plain = oracle::exact_best(model, 12, false);
    oracle::OracleResult pruned = oracle::exact_best(model, 12, true);
    if (plain.optimal_objective != pruned.optimal_objective ||
        plain.optimal.selected_action_ids != pruned.optimal.selected_action_ids ||
        plain.budget_best_objective != pruned.budget_best_objective ||
        plain.feasible_exists != pruned.feasible_exists) {
      check.fail("pruned and plain enumeration disagree on instance " + std::to_string(i));
      return;
    }
    if (plain.enumerated_count != (std::uint64_t(1) << model.actions.size())) {
      check.fail("plain enumeration did not visit every subset on instance " +
                 std::to_string(i));
      return;
    }
    for (int trial = 0; trial < 1000; ++trial) {
      std::set<std::string> pick;
      for (const auto& action : model.actions) {
        if (rng.below(2) == 0) pick.insert(action.id);
      }
      if (objective(model, pick) < plain.optimal_objective) {
        check.fail("random configuration beat the oracle on instance " + std::to_string(i));
        return;
      }
    }
  }
  check.note(std::to_string(instances) + " instances, 1000 random configurations each");
}

// --- criterion 3: solver vs oracle -----------------------------------------

void criterion_3(Check& check, std::vector<std::pair<FmecaModel, amas::TraceLog>>& traces) {
  const int total = 100;
  int feasible_reached = 0;
  std::vector<Rational> gaps;

  for (int i = 0; i < total; ++i) {
    gen::GenParams params = instance_params(i, 2, 8, 3, 12, 31000, true);
    FmecaModel model = gen::generate(params).model;

    amas::SolverResult solved = amas::run(model, {});
    oracle::OracleResult best = oracle::exact_best(model, 12, true);

    if (solved.best.objective < best.optimal_objective) {
      check.fail("solver beat the oracle on instance " + std::to_string(i));
      return;
    }
    std::string digest = ingest::model_digest(model);
    oracle::GapReport report = oracle::compare(
        solved.best.objective, solved.feasible_reached(model.budget), digest, best, digest);
    if (!best.feasible_exists) {
      check.fail("generator planted an infeasible instance " + std::to_string(i));
      return;
    }
    if (solved.feasible_reached(model.budget)) {
      ++feasible_reached;
      const Configuration& achieved = *solved.best_within_budget;
      Rational opt_cost = best.optimal_objective.cost;
      Rational gap = opt_cost.is_zero()
                         ? Rational(0)
                         : (achieved.total_cost - opt_cost) / opt_cost;
      if (gap.is_negative()) gap = Rational(0);
      gaps.push_back(gap);
    }
    (void)report;
    traces.emplace_back(std::move(model), std::move(solved.trace));
  }

  check.require(feasible_reached >= 80, "feasible on " + std::to_string(feasible_reached) +
                                            "/100 instances, need at least 80");
  std::sort(gaps.begin(), gaps.end());
  Rational median;
  if (!gaps.empty()) {
    size_t n = gaps.size();
    median = n % 2 == 1 ? gaps[n / 2]
                        : (gaps[n / 2 - 1] + gaps[n / 2]) / Rational(2);
  }
  check.require(!(Rational(1, 4) < median),
                "median relative cost gap " + median.str() + " exceeds 25%");
  check.note("feasible on " + std::to_string(feasible_reached) + "/100, median gap " +
             median.str());
}

// --- criterion 4: CLI determinism ------------------------------------------

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("fmeca-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void criterion_4(Check& check, std::vector<std::pair<FmecaModel, amas::TraceLog>>& traces) {
  const char* cli = std::getenv("FMECA_CLI");
  if (cli == nullptr) {
    check.fail("FMECA_CLI is not set");
    return;
  }
  Scratch scratch;
  std::string model_path = samples_dir() + "/train_detection.json";

  std::string first_report, first_trace, first_human;
  for (int i = 0; i < 10; ++i) {
    std::string report = scratch.path("report-" + std::to_string(i) + ".json");
    std::string human = scratch.path("report-" + std::to_string(i) + ".txt");
    std::string trace = scratch.path("trace-" + std::to_string(i) + ".jsonl");
    std::string command = std::string(cli) + " solve " + model_path + " --seed 7 -o " + report +
                          " --trace-out " + trace + " >/dev/null 2>&1";
    int status = std::system(command.c_str());
    if (status == -1 || WEXITSTATUS(status) != 0) {
      check.fail("cmd_solve run " + std::to_string(i) + " did not exit 0");
      return;
    }
    command = std::string(cli) + " solve " + model_path + " --seed 7 --format human -o " +
              human + " >/dev/null 2>&1";
    status = std::system(command.c_str());
    if (status == -1 || WEXITSTATUS(status) != 0) {
      check.fail("human-format run " + std::to_string(i) + " did not exit 0");
      return;
    }

    std::string report_bytes = read_file(report);
    std::string trace_bytes = read_file(trace);
    std::string human_bytes = read_file(human);
    if (i == 0) {
      first_report = report_bytes;
      first_trace = trace_bytes;
      first_human = human_bytes;
      if (report_bytes.empty() || trace_bytes.empty()) {
        check.fail("first run produced empty outputs");
        return;
      }
    } else {
      if (report_bytes != first_report) check.fail("machine report differs on run " + std::to_string(i));
      if (trace_bytes != first_trace) check.fail("trace differs on run " + std::to_string(i));
      if (human_bytes != first_human) check.fail("human report differs on run " + std::to_string(i));
      if (!check.pass) return;
    }
  }

  auto parsed = amas::parse_trace(first_trace);
  if (!parsed) {
    check.fail("CLI trace did not parse");
    return;
  }
  traces.emplace_back(load_sample_model(), std::move(*parsed));
  check.note("10 byte-identical runs (machine, human, trace)");
}

// --- criterion 5: invariant audit -------------------------------------------

void criterion_5(Check& check, const std::vector<std::pair<FmecaModel, amas::TraceLog>>& traces) {
  size_t audited = 0;
  for (const auto& [model, trace] : traces) {
    std::vector<std::string> violations = amas::audit_trace(model, trace);
    if (!violations.empty()) {
      check.fail("trace " + std::to_string(audited) + ": " + violations.front());
      return;
    }
    ++audited;
  }
  check.require(audited >= 100, "expected at least 100 traces to audit");
  check.note(std::to_string(audited) + " traces audited, zero violations");
}

// --- criterion 6: monotonicity property --------------------------------------

void criterion_6(Check& check) {
  gen::SplitMix64 rng(0x60606060);
  int checked = 0;
  while (checked < 1000) {
    gen::GenParams params;
    params.failure_modes = 1 + static_cast<int>(rng.below(6));
    params.actions = 2 + static_cast<int>(rng.below(10));
    params.seed = rng.next();
    FmecaModel model = gen::generate(params).model;

    for (int trial = 0; trial < 10 && checked < 1000; ++trial) {
      std::set<std::string> small, large;
      for (const auto& action : model.actions) {
        if (rng.below(2) == 0) {
          large.insert(action.id);
          if (rng.below(2) == 0) small.insert(action.id);
        }
      }
      const FailureMode& fm =
          model.failure_modes[rng.below(model.failure_modes.size())];
      if (residual_criticality(model, fm, large) > residual_criticality(model, fm, small)) {
        check.fail("monotonicity violated for " + fm.id);
        return;
      }
      RankTriple residual = residual_ranks(model, fm, large);
      for (Dimension d : kDimensions) {
        if (residual.rank(d).value < model.scale(d).min_rank() ||
            residual.rank(d).value > fm.rank(d).value) {
          check.fail("clamping bounds violated for " + fm.id);
          return;
        }
      }
      ++checked;
    }
  }
  check.note("1000 subset pairs, monotone and clamped");
}

// --- criterion 7: NCS behaviour ----------------------------------------------

void criterion_7(Check& check) {
  FmecaModel model = load_sample_model();

  // Over budget after a forced all-selected start: select-less in round 1.
  FmecaModel tight = model;
  tight.budget = Rational(1);
  amas::SolverConfig all;
  all.initial_selection = amas::SolverConfig::InitialSelection::all_recommended;
  amas::SolverResult over = amas::run(tight, all);
  bool down_round1 = false;
  for (const auto& ev : over.trace) {
    if (ev.round == 1 && ev.event == "feedback" && ev.payload.value("kind", "") == "down") {
      down_round1 = true;
    }
  }
  check.require(down_round1, "no select-less feedback in round 1 despite cost over budget");

  // A violating failure mode: select-more in round 1.
  amas::SolverResult violating = amas::run(model, {});
  bool up_round1 = false;
  for (const auto& ev : violating.trace) {
    if (ev.round == 1 && ev.event == "feedback" && ev.payload.value("kind", "") == "up") {
      up_round1 = true;
    }
  }
  check.require(up_round1, "no select-more feedback in round 1 despite a violated threshold");

  // The same two properties on generated instances.
  for (int i = 0; i < 5; ++i) {
    gen::GenParams params = instance_params(i, 2, 6, 3, 9, 77000, true);
    FmecaModel generated = gen::generate(params).model;

    bool initially_violating = false;
    for (const auto& fm : generated.failure_modes) {
      initially_violating |= initial_criticality(fm) > fm.critical_threshold;
    }
    if (initially_violating) {
      amas::SolverResult from_empty = amas::run(generated, {});
      bool up = false;
      for (const auto& ev : from_empty.trace) {
        if (ev.round == 1 && ev.event == "feedback" && ev.payload.value("kind", "") == "up") {
          up = true;
        }
      }
      check.require(up, "generated violating instance " + std::to_string(i) +
                            " emitted no select-more in round 1");
    }

    FmecaModel squeezed = generated;
    squeezed.budget = Rational(1, 100);
    amas::SolverResult forced = amas::run(squeezed, all);
    bool any_selected = false;
    for (const auto& fm : squeezed.failure_modes) {
      any_selected |= !fm.recommended_action_ids.empty();
    }
    if (any_selected) {
      bool down = false;
      for (const auto& ev : forced.trace) {
        if (ev.round == 1 && ev.event == "feedback" && ev.payload.value("kind", "") == "down") {
          down = true;
        }
      }
      check.require(down, "generated over-budget instance " + std::to_string(i) +
                              " emitted no select-less in round 1");
    }
  }

  // Fully satisfied model: exactly the quiet window, no mutations at all.
  FmecaModel satisfied = model;
  satisfied.failure_modes[0].critical_threshold = 6;
  amas::SolverConfig config;
  amas::SolverResult quiet = amas::run(satisfied, config);
  check.require(quiet.converged, "satisfied model must converge");
  check.require(quiet.rounds_used == config.quiescence_window,
                "satisfied model used " + std::to_string(quiet.rounds_used) +
                    " rounds, expected exactly " + std::to_string(config.quiescence_window));
  for (const auto& ev : quiet.trace) {
    if (ev.event == "add" || ev.event == "remove") {
      check.fail("mutation event in a satisfied model");
      break;
    }
  }
  check.note("down/up in round 1; satisfied model quiet for exactly k rounds");
}

// --- criterion 8: round-trip ---------------------------------------------------

void criterion_8(Check& check) {
  std::string sample = read_file(samples_dir() + "/train_detection.json");
  auto first = ingest::parse_model(sample, ingest::InputFormat::structured);
  if (!first.ok()) {
    check.fail("sample failed to parse");
    return;
  }
  std::string canonical = ingest::write_model(*first.document);
  auto second = ingest::parse_model(canonical, ingest::InputFormat::structured);
  if (!second.ok() || ingest::write_model(*second.document) != canonical) {
    check.fail("sample round-trip is not byte-exact");
    return;
  }

  for (int i = 0; i < 50; ++i) {
    gen::GenParams params = instance_params(i, 1, 8, 1, 14, 92000, i % 3 == 0);
    std::string bytes = ingest::write_model(gen::generate(params));
    auto parsed = ingest::parse_model(bytes, ingest::InputFormat::structured);
    if (!parsed.ok()) {
      check.fail("generated model " + std::to_string(i) + " failed to re-parse");
      return;
    }
    if (ingest::write_model(*parsed.document) != bytes) {
      check.fail("generated model " + std::to_string(i) + " round-trip differs");
      return;
    }
  }
  check.note("sample + 50 generated models, byte-exact");
}

struct Criterion {
  std::string name;
  double time_limit_seconds;  // 0 = no limit
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  std::vector<std::pair<FmecaModel, amas::TraceLog>> traces;

  std::vector<Criterion> criteria = {
      {"criticality formula exhaustive + sample verdict", 1.0, criterion_1},
      {"oracle: prune agreement, never beaten by random configurations", 60.0, criterion_2},
      {"solver vs oracle: feasibility rate and cost gap", 120.0,
       [&traces](Check& check) { criterion_3(check, traces); }},
      {"determinism: 10 identical cmd_solve runs", 0.0,
       [&traces](Check& check) { criterion_4(check, traces); }},
      {"invariant audit over all collected traces", 0.0,
       [&traces](Check& check) { criterion_5(check, traces); }},
      {"monotonicity and clamping of residual criticality", 5.0, criterion_6},
      {"NCS emission and quiescence behaviour", 0.0, criterion_7},
      {"round-trip identity after canonicalization", 0.0, criterion_8},
  };

  bool all_pass = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    auto start = Clock::now();
    try {
      criteria[i].body(check);
    } catch (const std::exception& e) {
      check.fail(std::string("exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (criteria[i].time_limit_seconds > 0 && seconds > criteria[i].time_limit_seconds) {
      check.fail("took " + std::to_string(seconds) + "s, limit " +
                 std::to_string(criteria[i].time_limit_seconds) + "s");
    }

    std::ostringstream line;
    line << (check.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
         << criteria[i].name;
    if (!check.detail.empty()) line << " - " << check.detail;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << " (" << seconds << "s)";
    std::cout << line.str() << "\n";
    all_pass = all_pass && check.pass;
  }
  return all_pass ? 0 : 1;
}
