// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hfseq/batch.hpp"
#include "hfseq/cache.hpp"
#include "hfseq/layout.hpp"
#include "hfseq/model_config.hpp"

namespace hfseq {

struct ForwardOptions {
  // 0 keeps every timestep. k > 0 retains the recurrent state only at
  // t = 0, k, 2k, ... plus what is needed to recompute the rest, cutting
  // peak storage to ceil(T/k) + k states during the backward pass.
  int checkpoint_interval = 0;
  // Carried-in recurrent state; nullptr means zeros.
  const RecurrentState* initial_state = nullptr;
  // Retain per-timestep output distributions in the cache.
  bool store_outputs = true;
};

struct ForwardResult {
  ActivationCache cache;
  // Summed loss divided by n * active_steps (natural log for softmax,
  // squared-error/2 for linear_mse).
  double loss = 0.0;
  // Softmax: loss / ln 2, the mean -log2 probability per character.
  // linear_mse: equal to loss.
  double bits_per_char = 0.0;
  RecurrentState final_state;
};

ForwardResult forward(const ModelConfig& config, const ParameterSet& params,
                      const Batch& batch, const ForwardOptions& options = {});

struct GradientResult {
  Vector grad;  // d(mean loss)/d(theta)
  double loss = 0.0;
  double bits_per_char = 0.0;
  // Peak number of per-timestep recurrent states simultaneously retained.
  int peak_states = 0;
};

GradientResult gradient(const ModelConfig& config, const ParameterSet& params,
                        const Batch& batch, const ForwardOptions& options = {});

// Gradient with sqrt(T)-style recomputation: mathematically identical to
// gradient(), with peak retained recurrent states <= ceil(T/k) + k.
// interval must lie in [1, T].
GradientResult checkpointed_backward(const ModelConfig& config, const ParameterSet& params,
                                     const Batch& batch, int interval);

// Pre-softmax output z(t) built from cached hidden states at local step t.
Matrix logits_from_cache(const ModelConfig& config, const ParameterSet& params,
                         const std::vector<LayerCache>& layers, int t);

}  // namespace hfseq
