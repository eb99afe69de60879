#pragma once

#include <cstdint>

namespace dsiscan {

// Counter-based uniform generator. Draw i of a stream is a pure function of
// (seed, stream, i), so batches can be partitioned across workers without
// changing the values.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  // Uniform on the open interval (0, 1).
  double uniform(std::uint64_t i) const;
  // Standard normal via inverse CDF.
  double normal(std::uint64_t i) const;

  std::uint64_t bits(std::uint64_t i) const;

  // Sequential convenience for inherently ordered uses (e.g. shuffles).
  double next() { return uniform(counter_++); }
  std::uint64_t next_bits() { return bits(counter_++); }

  CounterRng substream(std::uint64_t stream) const {
    return CounterRng(seed_, stream_ * 0x100000001ULL + stream + 1);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Inverse of the standard normal CDF, accurate to ~1e-15 after refinement.
double inverse_normal_cdf(double p);

}  // namespace dsiscan
