// Copyright 2026 The motionadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace motionadapt {

// Seeded random stream. Wraps std::mt19937_64 and derives uniform and
// normal variates without hidden caches, so the full state is the engine
// state and can be checkpointed as a string.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);
  double normal();
  std::uint64_t next_u64() { return engine_(); }

  // Derives an independent child stream (used to fan out per-network seeds).
  Rng split();

  std::string state() const;
  void set_state(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace motionadapt
