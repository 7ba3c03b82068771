// SPDX-License-Identifier: Apache-2.0
#include "hfseq/stream_model.hpp"

#include "arch.hpp"

namespace hfseq {

StreamModel::StreamModel(const ModelConfig& config, const ParameterSet& params)
    : config_(config), params_(params), state_(RecurrentState::zeros(config, 1)) {
  config_.validate();
  if (params.theta.size() != params.layout.total())
    throw DimensionError("stream model: theta length does not match layout");
}

void StreamModel::reset() { state_ = RecurrentState::zeros(config_, 1); }

Vector StreamModel::advance(Batch&& b) {
  std::vector<LayerCache> lc(config_.layers());
  detail::hidden_forward(config_, params_, b, 0, 1, state_, lc);
  for (int l = 0; l < config_.layers(); ++l) {
    state_.h[l] = lc[l].h[0];
    if (!state_.cell.empty()) state_.cell[l] = lc[l].cell[0];
  }
  return logits();
}

Vector StreamModel::step(int symbol) {
  if (symbol < 0 || symbol >= config_.vocab_size)
    throw DimensionError("stream model: symbol id out of range");
  Batch b;
  b.T = 1;
  b.n = 1;
  b.input_ids.resize(1, 1);
  b.input_ids(0, 0) = symbol;
  return advance(std::move(b));
}

Vector StreamModel::step_dense(const Vector& input) {
  if (input.size() != config_.vocab_size)
    throw DimensionError("stream model: dense input must have V entries");
  Batch b;
  b.T = 1;
  b.n = 1;
  b.input_dense.assign(1, input);
  return advance(std::move(b));
}

Vector StreamModel::logits() const {
  const auto w_oh = detail::output_views(config_, params_.layout, params_.theta);
  Vector z = w_oh[0] * state_.h[0];
  for (int l = 1; l < config_.layers(); ++l) z.noalias() += w_oh[l] * state_.h[l];
  return z;
}

}  // namespace hfseq
