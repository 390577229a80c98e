#pragma once

#include <cstdint>

namespace mgap {

// Counter-based generator (splitmix64 finalizer over key + counter).
// Same seed gives the same stream bit-for-bit; child(i) derives a
// statistically independent stream, so parallel work can fan out one
// stream per task index and stay schedule-independent.
class Rng {
public:
  static Rng seeded(std::uint64_t seed);

  // Independent stream for substream index i (trial, repeat, layer, ...).
  Rng child(std::uint64_t i) const;

  std::uint64_t next_u64();

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1]
  double normal();       // standard normal, Box-Muller with cached spare

  std::uint64_t seed_key() const { return key_; }

private:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mgap
