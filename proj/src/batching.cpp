// SPDX-License-Identifier: Apache-2.0
#include "hfseq/batching.hpp"

#include <algorithm>

namespace hfseq {

std::vector<long> window_starts(long length, int T) {
  if (T < 2) throw ConfigError("sequence length T must be >= 2");
  std::vector<long> starts;
  for (long s = 0; s + T + 1 <= length; s += T) starts.push_back(s);
  if (starts.empty())
    throw ConfigError("split of length " + std::to_string(length) +
                      " is too short for one window of length T+1 = " + std::to_string(T + 1));
  return starts;
}

Batch windows_to_batch(const std::vector<int>& ids, const std::vector<long>& starts, int T) {
  Batch b;
  b.T = T;
  b.n = static_cast<int>(starts.size());
  b.input_ids.resize(T, b.n);
  b.target_ids.resize(T, b.n);
  for (int j = 0; j < b.n; ++j) {
    const long s = starts[j];
    for (int t = 0; t < T; ++t) {
      b.input_ids(t, j) = ids[s + t];
      b.target_ids(t, j) = ids[s + t + 1];
    }
  }
  return b;
}

Batch all_windows_batch(const std::vector<int>& ids, int T) {
  return windows_to_batch(ids, window_starts(static_cast<long>(ids.size()), T), T);
}

std::vector<long> sample_without_replacement(const std::vector<long>& pool, long count, Rng& rng) {
  std::vector<long> work = pool;
  count = std::min<long>(count, static_cast<long>(work.size()));
  for (long i = 0; i < count; ++i) {
    const long j = i + static_cast<long>(rng.below(work.size() - i));
    std::swap(work[i], work[j]);
  }
  work.resize(count);
  return work;
}

BatchStream::BatchStream(const std::vector<int>& ids, int T, long budget_chars,
                         std::uint64_t seed)
    : ids_(ids), T_(T), seed_(seed) {
  starts_ = window_starts(static_cast<long>(ids.size()), T);
  if (budget_chars <= 0) {
    per_batch_ = 0;
  } else {
    per_batch_ = std::min<long>(static_cast<long>(starts_.size()), budget_chars / T);
    per_batch_ = std::max<long>(1, per_batch_);
  }
}

Batch BatchStream::next(long iteration) {
  if (per_batch_ == 0 || per_batch_ >= static_cast<long>(starts_.size()))
    return windows_to_batch(ids_, starts_, T_);
  Rng rng(seed_, 0x6261746368ull + static_cast<std::uint64_t>(iteration));
  std::vector<long> chosen = sample_without_replacement(starts_, per_batch_, rng);
  std::sort(chosen.begin(), chosen.end());
  return windows_to_batch(ids_, chosen, T_);
}

Batch curvature_subset(const Batch& batch, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("curvature fraction must lie in (0, 1]");
  long count = static_cast<long>(batch.n * fraction);
  count = std::max<long>(1, std::min<long>(count, batch.n));
  if (count == batch.n) return batch;
  std::vector<long> all(batch.n);
  for (int j = 0; j < batch.n; ++j) all[j] = j;
  std::vector<long> chosen = sample_without_replacement(all, count, rng);
  std::sort(chosen.begin(), chosen.end());
  std::vector<int> cols(chosen.begin(), chosen.end());
  return batch.columns(cols);
}

}  // namespace hfseq
