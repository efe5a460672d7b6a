#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace cogom {

/// Counter-based 64-bit generator (SplitMix64 finalizer over key + counter).
///
/// Each named stream derives its own key from (seed, name), so draws for one
/// matrix never depend on how many draws another matrix consumed. Satisfies
/// UniformRandomBitGenerator for use with boost::random distributions, which
/// are used instead of <random>'s because their output is fixed across
/// standard library implementations.
class CounterRng {
public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::string_view stream);
  explicit CounterRng(std::uint64_t seed) : CounterRng(seed, "default") {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform draw on [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace cogom
