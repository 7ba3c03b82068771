// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hfseq/model_config.hpp"
#include "hfseq/types.hpp"

namespace hfseq {

// A set of n equal-length sequences. Text batches store symbol ids (one-hot
// semantics); regression batches store dense per-timestep columns. Targets
// follow the same split, and loss_weight selects which timesteps contribute
// to the loss (empty means every timestep, weight 1).
struct Batch {
  int T = 0;
  int n = 0;

  // Symbol-id form, T x n. Empty (0 x 0) when the dense form is used.
  Eigen::MatrixXi input_ids;
  Eigen::MatrixXi target_ids;

  // Dense form, one V x n (inputs) / out x n (targets) matrix per timestep.
  std::vector<Matrix> input_dense;
  std::vector<Matrix> target_dense;

  std::vector<double> loss_weight;

  bool has_dense_inputs() const { return !input_dense.empty(); }
  bool has_dense_targets() const { return !target_dense.empty(); }
  double weight(int t) const { return loss_weight.empty() ? 1.0 : loss_weight[t]; }
  // Sum of per-timestep loss weights (T for text batches).
  double active_steps() const;

  // Checks symbol ids against V, shapes against the config.
  void validate(const ModelConfig& config) const;

  // Column subset (sequence subset), preserving T and loss weights.
  Batch columns(const std::vector<int>& cols) const;
};

// W * I(t). One-hot inputs reduce to a column gather, which is bit-identical
// to the dense product; dense inputs use a real GEMM.
Matrix input_product(const ConstView& w, const Batch& batch, int t);

// dW += delta * I(t)^T, the adjoint of input_product.
void add_input_outer(MutView dw, const Matrix& delta, const Batch& batch, int t);

}  // namespace hfseq
