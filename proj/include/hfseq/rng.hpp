// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace hfseq {

// Deterministic counter-style generator. A given (seed, stream) pair yields
// the same draw sequence on every run and platform; distinct streams derived
// from one seed are independent and never shared between threads.
//
// Uniform bits come from a SplitMix64 walk; normals use Box-Muller on the
// 53-bit uniforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Standard normal.
  double normal();
  // Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_;
  std::uint64_t stream_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hfseq
