#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace areaest {

// Seed derivation for labeled substreams. Every random draw in the library
// goes through an Rng obtained from substream(seed, label[, index]) so that
// results do not depend on call order or thread scheduling.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label);
std::uint64_t hash_label(std::string_view label);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). Unbiased, and identical on every
  /// standard library since it only relies on mt19937_64 output.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

Rng substream(std::uint64_t seed, std::string_view label);
Rng substream(std::uint64_t seed, std::string_view label, std::uint64_t index);

}  // namespace areaest
