// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hfseq/batch.hpp"
#include "hfseq/cache.hpp"
#include "hfseq/model.hpp"

namespace hfseq {

// Which hidden quantity the structural penalty tracks for gated cells.
// Non-gated cells always use their (only) hidden state.
enum class StructuralTarget { hidden_output, cell_state };

// Everything needed to evaluate v -> (G + mu*G_s + lambda*I) v for a fixed
// parameter point and batch: the batch is split into fixed-size chunks whose
// forward caches are retained across conjugate-gradient iterations. Chunk
// results are reduced in chunk order, so products are deterministic for any
// worker count.
struct CurvatureContext {
  ModelConfig config;
  ParameterSet params;
  double mu = 0.0;
  double lambda = 0.0;
  StructuralTarget structural_target = StructuralTarget::hidden_output;

  struct Chunk {
    Batch batch;
    ActivationCache cache;
  };
  std::vector<Chunk> chunks;
  int n_total = 0;
  double active_steps = 0.0;
  int T = 0;
  int workers = 1;

  static CurvatureContext build(const ModelConfig& config, const ParameterSet& params,
                                const Batch& batch, double mu, double lambda,
                                int chunk_size = 256, int workers = 1,
                                StructuralTarget target = StructuralTarget::hidden_output);

  // Curvature-batch loss at params.theta + step (forward passes only).
  double loss_at(const Vector& step) const;
};

// Directional derivative of the outputs: R(O(t)) for every timestep, columns
// spanning the whole curvature batch in sequence order. For softmax mode this
// is the derivative of the post-softmax distributions; for linear outputs it
// is the derivative of the outputs themselves. Linear in v.
std::vector<Matrix> r_forward(const CurvatureContext& ctx, const Vector& v);

// (diag(O) - O O^T) r without materializing the matrix; identity for
// linear_mse.
Vector apply_output_hessian(OutputMode mode, const Vector& o, const Vector& r);
Matrix apply_output_hessian_columns(OutputMode mode, const Matrix& o, const Matrix& r);

// (G + mu*G_s + lambda*I) v under the same 1/(n*T) scaling as the gradient.
// G is never materialized.
Vector gauss_newton_product(const CurvatureContext& ctx, const Vector& v);

// G_s v alone: the Gauss-Newton matrix of the hidden-state-change penalty
// with an identity output Hessian, scaled by 1/(n*T).
Vector structural_curvature_product(const CurvatureContext& ctx, const Vector& v);

}  // namespace hfseq
