#pragma once

#include <cstdint>

#include "fmeca/ingest.hpp"
#include "fmeca/model.hpp"

namespace fmeca::gen {

/// Deterministic 64-bit generator with a stable output sequence across
/// platforms; standard-library distributions are implementation-defined,
/// so generated instances go through this instead.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : next() % bound; }

  int range(int lo, int hi) {  // inclusive
    if (hi <= lo) return lo;
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

struct GenParams {
  int failure_modes = 1;
  int actions = 2;
  std::uint64_t seed = 0;
  /// Plant a configuration with zero violations within the budget, then add
  /// distractors around it.
  bool feasible = false;
};

/// Emits a validation-clean model using relation types 1 and 2 only. The
/// same parameters always produce the same document bytes.
ingest::ModelDocument generate(const GenParams& params);

}  // namespace fmeca::gen
