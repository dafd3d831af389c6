#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace qgibbs {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

// Counter-based streams: (seed, experiment, index) -> independent engine.
// Re-running one experiment never shifts the draws of another.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view experiment,
                          std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  Rng(std::uint64_t seed, std::string_view experiment, std::uint64_t index)
      : eng_(stream_seed(seed, experiment, index)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::complex<double> cnormal() {
    double a = normal(), b = normal();
    return {a / std::sqrt(2.0), b / std::sqrt(2.0)};
  }
  double exponential() { return std::exponential_distribution<double>(1.0)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qgibbs
