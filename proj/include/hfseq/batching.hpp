// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hfseq/batch.hpp"
#include "hfseq/rng.hpp"

namespace hfseq {

// Start offsets of the contiguous non-overlapping length-(T+1) windows of a
// character array: 0, T, 2T, ... while a full window fits. Window at s
// yields inputs ids[s..s+T) and targets ids[s+1..s+T+1).
std::vector<long> window_starts(long length, int T);

// Assembles a text batch from the given windows.
Batch windows_to_batch(const std::vector<int>& ids, const std::vector<long>& starts, int T);

// Batch over all windows of the split.
Batch all_windows_batch(const std::vector<int>& ids, int T);

// Draws `count` distinct elements of `pool` uniformly (order preserved from
// a partial Fisher-Yates pass, deterministic for a given rng state).
std::vector<long> sample_without_replacement(const std::vector<long>& pool, long count, Rng& rng);

// Per-iteration batch source. Strategy "all" replays every window each call;
// "subset" draws a fresh seeded subset covering about budget_chars
// characters. Curvature batches come from curvature_subset on the current
// gradient batch.
class BatchStream {
 public:
  BatchStream(const std::vector<int>& ids, int T, long budget_chars, std::uint64_t seed);
  // iteration is used as the rng stream, so any iteration's batch can be
  // regenerated independently (resume needs no stream state).
  Batch next(long iteration);
  long n_windows() const { return static_cast<long>(starts_.size()); }

 private:
  const std::vector<int>& ids_;
  int T_;
  long per_batch_;  // windows per batch (0 = all)
  std::uint64_t seed_;
  std::vector<long> starts_;
};

// Random sequence subset of an existing batch: floor(batch.n * fraction)
// columns, at least 1.
Batch curvature_subset(const Batch& batch, double fraction, Rng& rng);

}  // namespace hfseq
