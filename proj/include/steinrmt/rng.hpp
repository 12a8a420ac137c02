#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace steinrmt {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of the stream with the given index, derived from a root seed. Distinct
// (seed, stream) pairs give statistically independent engines.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Random stream used by every sampler.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The uniform and normal transforms are implemented here instead of
/// using std::*_distribution, whose algorithms are implementation-defined, so a
/// (seed, stream) pair produces the same numbers on every platform.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  // Standard normal (Marsaglia polar method).
  double normal();
  // Standard complex normal, E|z|^2 = 1.
  std::complex<double> complex_normal();

  // Child stream; does not advance this stream.
  [[nodiscard]] Rng split(std::uint64_t child) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace steinrmt
