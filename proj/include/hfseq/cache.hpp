// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hfseq/model_config.hpp"
#include "hfseq/types.hpp"

namespace hfseq {

// Recurrently-propagated state at one time boundary: per-layer hidden output
// h (post-activation) and, for gated cells, the internal cell state.
struct RecurrentState {
  std::vector<Matrix> h;
  std::vector<Matrix> cell;

  static RecurrentState zeros(const ModelConfig& config, int n);
};

// Per-layer activations for every timestep of a forward pass. Gated cells
// fill cell/cell_in and the gate arrays; multiplicative cells fill chi and
// xi (the factor products, with M(t) = chi(t) .* xi(t)).
struct LayerCache {
  std::vector<Matrix> h;        // H / H_out, post-activation
  std::vector<Matrix> cell;     // H_state
  std::vector<Matrix> cell_in;  // H_in, pre-gate cell input
  std::vector<Matrix> gate_w;   // input (write) gate, post-sigmoid
  std::vector<Matrix> gate_f;   // forget gate, post-sigmoid
  std::vector<Matrix> gate_r;   // output (read) gate, post-sigmoid
  std::vector<Matrix> chi;      // W_mi I(t)
  std::vector<Matrix> xi;       // W_mh H(t-1)
};

struct ActivationCache {
  int T = 0;
  int n = 0;
  std::vector<LayerCache> layers;
  // Post-softmax distributions (each column sums to 1) or linear outputs.
  // Empty when the forward pass was asked not to retain them.
  std::vector<Matrix> outputs;
  RecurrentState initial;

  // Checkpointed form: recurrent state at t = 0, k, 2k, ... only.
  std::vector<RecurrentState> boundaries;
  int checkpoint_interval = 0;

  RecurrentState state_at(int t) const;  // from full per-timestep storage
};

}  // namespace hfseq
