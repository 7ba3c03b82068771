// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hfseq/batch.hpp"
#include "hfseq/cache.hpp"
#include "hfseq/layout.hpp"
#include "hfseq/model_config.hpp"

namespace hfseq {

// One-symbol-at-a-time evaluation sharing the batched recurrence code.
// logits() reads the current state without consuming input, so a fresh
// model (zero state) predicts the zero-logit distribution.
class StreamModel {
 public:
  StreamModel(const ModelConfig& config, const ParameterSet& params);

  void reset();
  // Consumes one symbol and returns the logits for the next prediction.
  Vector step(int symbol);
  Vector step_dense(const Vector& input);
  Vector logits() const;

  const RecurrentState& state() const { return state_; }
  void set_state(RecurrentState s) { state_ = std::move(s); }

 private:
  Vector advance(Batch&& b);
  const ModelConfig& config_;
  const ParameterSet& params_;
  RecurrentState state_;
};

}  // namespace hfseq
