#pragma once

// Portable counter-based random streams built on SplitMix64.

#include <cstdint>
#include <initializer_list>

namespace wvamp {

/// One SplitMix64 step: advances the state and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Hashes a list of counters into a stream key. Distinct lists give
/// statistically independent streams.
std::uint64_t stream_key(std::initializer_list<std::uint64_t> counters);

class Rng {
 public:
  explicit Rng(std::uint64_t key) : state_(key) {}

  std::uint64_t next() { return splitmix64(state_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open();

  /// Standard exponential variate.
  double exponential();

  /// Poisson variate by counting exponential inter-arrival times.
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t state_;
};

}  // namespace wvamp
