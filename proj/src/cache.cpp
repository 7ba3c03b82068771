// SPDX-License-Identifier: Apache-2.0
#include "hfseq/cache.hpp"

namespace hfseq {

RecurrentState RecurrentState::zeros(const ModelConfig& config, int n) {
  RecurrentState s;
  s.h.reserve(config.layers());
  for (int h : config.hidden_sizes) s.h.push_back(Matrix::Zero(h, n));
  if (config.gated()) {
    s.cell.reserve(config.layers());
    for (int h : config.hidden_sizes) s.cell.push_back(Matrix::Zero(h, n));
  }
  return s;
}

RecurrentState ActivationCache::state_at(int t) const {
  // t in [0, T]; t == 0 is the carried-in state.
  if (t == 0) return initial;
  RecurrentState s;
  for (const LayerCache& lc : layers) {
    s.h.push_back(lc.h[t - 1]);
    if (!lc.cell.empty()) s.cell.push_back(lc.cell[t - 1]);
  }
  return s;
}

}  // namespace hfseq
