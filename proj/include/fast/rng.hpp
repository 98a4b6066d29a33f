#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fast {

/// Seeded Mersenne-Twister stream. Every sampled quantity in the library is a
/// pure function of the seed handed to this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }
  std::uint64_t binomial(std::uint64_t trials, double p);
  /// Multinomial counts over `probs` (need not be normalised exactly).
  std::vector<std::uint64_t> multinomial(std::uint64_t trials, std::span<const double> probs);
  /// Index drawn from the categorical distribution given by a cumulative table.
  std::size_t categorical(std::span<const double> cumulative);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser applied to (seed, stream) pairs; used to give every
/// independent task its own stream regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b);

}  // namespace fast
