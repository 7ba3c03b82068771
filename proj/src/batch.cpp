// SPDX-License-Identifier: Apache-2.0
#include "hfseq/batch.hpp"

#include <numeric>

namespace hfseq {

double Batch::active_steps() const {
  if (loss_weight.empty()) return static_cast<double>(T);
  return std::accumulate(loss_weight.begin(), loss_weight.end(), 0.0);
}

void Batch::validate(const ModelConfig& config) const {
  if (T <= 0 || n <= 0) throw DimensionError("batch must have positive T and n");
  if (has_dense_inputs()) {
    if (static_cast<int>(input_dense.size()) != T)
      throw DimensionError("batch input_dense must have T entries");
    for (const Matrix& x : input_dense)
      if (x.rows() != config.vocab_size || x.cols() != n)
        throw DimensionError("batch input_dense entries must be V x n");
  } else {
    if (input_ids.rows() != T || input_ids.cols() != n)
      throw DimensionError("batch input_ids must be T x n");
    if ((input_ids.array() < 0).any() || (input_ids.array() >= config.vocab_size).any())
      throw DimensionError("batch input symbol id out of range [0, V)");
  }
  if (has_dense_targets()) {
    if (static_cast<int>(target_dense.size()) != T)
      throw DimensionError("batch target_dense must have T entries");
    for (const Matrix& y : target_dense)
      if (y.rows() != config.out() || y.cols() != n)
        throw DimensionError("batch target_dense entries must be out x n");
  } else {
    if (config.output_mode != OutputMode::softmax_xent)
      throw DimensionError("linear_mse batches need dense targets");
    if (target_ids.rows() != T || target_ids.cols() != n)
      throw DimensionError("batch target_ids must be T x n");
    if ((target_ids.array() < 0).any() || (target_ids.array() >= config.out()).any())
      throw DimensionError("batch target symbol id out of range [0, out)");
  }
  if (!loss_weight.empty() && static_cast<int>(loss_weight.size()) != T)
    throw DimensionError("batch loss_weight must have T entries");
}

Batch Batch::columns(const std::vector<int>& cols) const {
  Batch out;
  out.T = T;
  out.n = static_cast<int>(cols.size());
  out.loss_weight = loss_weight;
  if (has_dense_inputs()) {
    out.input_dense.resize(T);
    for (int t = 0; t < T; ++t) {
      out.input_dense[t].resize(input_dense[t].rows(), out.n);
      for (int j = 0; j < out.n; ++j) out.input_dense[t].col(j) = input_dense[t].col(cols[j]);
    }
  } else {
    out.input_ids.resize(T, out.n);
    for (int j = 0; j < out.n; ++j) out.input_ids.col(j) = input_ids.col(cols[j]);
  }
  if (has_dense_targets()) {
    out.target_dense.resize(T);
    for (int t = 0; t < T; ++t) {
      out.target_dense[t].resize(target_dense[t].rows(), out.n);
      for (int j = 0; j < out.n; ++j) out.target_dense[t].col(j) = target_dense[t].col(cols[j]);
    }
  } else if (target_ids.size() > 0) {
    out.target_ids.resize(T, out.n);
    for (int j = 0; j < out.n; ++j) out.target_ids.col(j) = target_ids.col(cols[j]);
  }
  return out;
}

Matrix input_product(const ConstView& w, const Batch& batch, int t) {
  if (batch.has_dense_inputs()) return w * batch.input_dense[t];
  Matrix out(w.rows(), batch.n);
  for (int j = 0; j < batch.n; ++j) out.col(j) = w.col(batch.input_ids(t, j));
  return out;
}

void add_input_outer(MutView dw, const Matrix& delta, const Batch& batch, int t) {
  if (batch.has_dense_inputs()) {
    dw.noalias() += delta * batch.input_dense[t].transpose();
    return;
  }
  for (int j = 0; j < batch.n; ++j) dw.col(batch.input_ids(t, j)) += delta.col(j);
}

}  // namespace hfseq
