// SPDX-License-Identifier: Apache-2.0
#include "hfseq/curvature.hpp"

#include <cmath>

#include "arch.hpp"
#include "parallel.hpp"

namespace hfseq {

using namespace detail;

CurvatureContext CurvatureContext::build(const ModelConfig& config, const ParameterSet& params,
                                         const Batch& batch, double mu, double lambda,
                                         int chunk_size, int workers, StructuralTarget target) {
  if (mu < 0 || lambda < 0 || !std::isfinite(mu) || !std::isfinite(lambda))
    throw ConfigError("damping weights must be finite and non-negative");
  batch.validate(config);

  CurvatureContext ctx;
  ctx.config = config;
  ctx.params = params;
  ctx.mu = mu;
  ctx.lambda = lambda;
  ctx.structural_target = target;
  ctx.n_total = batch.n;
  ctx.active_steps = batch.active_steps();
  ctx.T = batch.T;
  ctx.workers = std::max(1, workers);

  chunk_size = std::max(1, chunk_size);
  for (int a = 0; a < batch.n; a += chunk_size) {
    std::vector<int> cols;
    for (int j = a; j < std::min(batch.n, a + chunk_size); ++j) cols.push_back(j);
    ctx.chunks.push_back(Chunk{batch.columns(cols), ActivationCache{}});
  }
  parallel_index(static_cast<int>(ctx.chunks.size()), ctx.workers, [&](int i) {
    Chunk& c = ctx.chunks[i];
    c.cache = forward(config, params, c.batch).cache;
  });
  return ctx;
}

double CurvatureContext::loss_at(const Vector& step) const {
  const ParameterSet p = add_scaled(params, step, 1.0);
  std::vector<double> sums(chunks.size(), 0.0);
  parallel_index(static_cast<int>(chunks.size()), workers, [&](int i) {
    ForwardOptions opts;
    opts.store_outputs = false;
    const ForwardResult f = forward(config, p, chunks[i].batch, opts);
    // un-normalize back to the chunk's summed loss
    sums[i] = f.loss * chunks[i].batch.n * chunks[i].batch.active_steps();
  });
  double total = 0.0;
  for (double s : sums) total += s;
  return total / (n_total * active_steps);
}

Vector apply_output_hessian(OutputMode mode, const Vector& o, const Vector& r) {
  if (mode == OutputMode::linear_mse) return r;
  return (o.array() * r.array()).matrix() - o * o.dot(r);
}

Matrix apply_output_hessian_columns(OutputMode mode, const Matrix& o, const Matrix& r) {
  if (mode == OutputMode::linear_mse) return r;
  Matrix out = o.array() * r.array();
  const Eigen::RowVectorXd dots = (o.array() * r.array()).colwise().sum();
  out -= o * dots.asDiagonal();
  return out;
}

namespace {

// R-forward over one chunk: hidden directional derivatives plus, per
// timestep, the output-space image used by both the public r_forward and the
// Gauss-Newton backward seed.
struct ChunkR {
  Seeds r_h;
  Seeds r_cell;
  std::vector<Matrix> r_out;  // H_sigma R(z) for softmax, R(z) for linear
};

ChunkR chunk_rforward(const CurvatureContext& ctx, const CurvatureContext::Chunk& c,
                      const Vector& v, bool want_cell) {
  const ModelConfig& config = ctx.config;
  ChunkR r;
  r.r_h = zero_seeds(config, c.batch.T, c.batch.n);
  Seeds* cell_ptr = nullptr;
  if (want_cell && config.gated()) {
    r.r_cell = zero_seeds(config, c.batch.T, c.batch.n);
    cell_ptr = &r.r_cell;
  }
  hidden_rforward(config, ctx.params, v, c.batch, 0, c.batch.T, c.cache.initial, c.cache.layers,
                  r.r_h, cell_ptr);

  const auto w_oh = output_views(config, ctx.params.layout, ctx.params.theta);
  const auto rv_oh = output_views(config, ctx.params.layout, v);
  r.r_out.resize(c.batch.T);
  for (int t = 0; t < c.batch.T; ++t) {
    Matrix r_z = rv_oh[0] * c.cache.layers[0].h[t];
    r_z.noalias() += w_oh[0] * r.r_h[0][t];
    for (int l = 1; l < config.layers(); ++l) {
      r_z.noalias() += rv_oh[l] * c.cache.layers[l].h[t];
      r_z.noalias() += w_oh[l] * r.r_h[l][t];
    }
    r.r_out[t] = apply_output_hessian_columns(config.output_mode, c.cache.outputs[t], r_z);
  }
  return r;
}

// One chunk's contribution to (G + mu*G_s) v, as an unscaled-by-lambda
// layout-shaped vector. with_loss_term toggles the output-loss curvature,
// struct_weight scales the hidden-state penalty curvature.
Vector chunk_product(const CurvatureContext& ctx, const CurvatureContext::Chunk& c,
                     const Vector& v, bool with_loss_term, double struct_weight) {
  const ModelConfig& config = ctx.config;
  const Batch& b = c.batch;
  const double scale = 1.0 / (ctx.n_total * ctx.active_steps);
  const double struct_scale = struct_weight / (ctx.n_total * ctx.T);
  const bool cell_target =
      config.gated() && ctx.structural_target == StructuralTarget::cell_state;

  ChunkR r = chunk_rforward(ctx, c, v, struct_weight != 0.0 && cell_target);

  Vector out = Vector::Zero(ctx.params.theta.size());
  Seeds dh = zero_seeds(config, b.T, b.n);
  Seeds dcell;
  if (struct_weight != 0.0 && cell_target) dcell = zero_seeds(config, b.T, b.n);

  if (with_loss_term) {
    const auto w_oh = output_views(config, ctx.params.layout, ctx.params.theta);
    std::vector<MutView> g_oh;
    if (config.architecture == Architecture::stacked_mrnn) {
      for (int l = 0; l < config.layers(); ++l)
        g_oh.push_back(ctx.params.layout.view(out, "W_oh." + std::to_string(l + 1)));
    } else {
      g_oh.push_back(ctx.params.layout.view(out, "W_oh"));
    }
    for (int t = 0; t < b.T; ++t) {
      const double wt = b.weight(t);
      if (wt == 0.0) continue;
      const Matrix dz = r.r_out[t] * (wt * scale);
      for (int l = 0; l < config.layers(); ++l) {
        g_oh[l].noalias() += dz * c.cache.layers[l].h[t].transpose();
        dh[l][t].noalias() += w_oh[l].transpose() * dz;
      }
    }
  }
  if (struct_weight != 0.0) {
    for (int t = 0; t < b.T; ++t)
      for (int l = 0; l < config.layers(); ++l) {
        if (cell_target)
          dcell[l][t] = struct_scale * r.r_cell[l][t];
        else
          dh[l][t] += struct_scale * r.r_h[l][t];
      }
  }

  hidden_backward(config, ctx.params, out, b, 0, b.T, c.cache.initial, c.cache.layers, dh,
                  dcell.empty() ? nullptr : &dcell, BackwardCarry::zeros(config, b.n));
  return out;
}

Vector reduce_chunks(const CurvatureContext& ctx, const Vector& v, bool with_loss_term,
                     double struct_weight) {
  if (v.size() != ctx.params.theta.size())
    throw DimensionError("curvature product: |v| must equal |theta|");
  std::vector<Vector> parts(ctx.chunks.size());
  parallel_index(static_cast<int>(ctx.chunks.size()), ctx.workers, [&](int i) {
    parts[i] = chunk_product(ctx, ctx.chunks[i], v, with_loss_term, struct_weight);
  });
  Vector total = Vector::Zero(v.size());
  for (const Vector& p : parts) total += p;
  return total;
}

}  // namespace

std::vector<Matrix> r_forward(const CurvatureContext& ctx, const Vector& v) {
  if (v.size() != ctx.params.theta.size())
    throw DimensionError("r_forward: |v| must equal |theta|");
  std::vector<ChunkR> parts(ctx.chunks.size());
  parallel_index(static_cast<int>(ctx.chunks.size()), ctx.workers, [&](int i) {
    parts[i] = chunk_rforward(ctx, ctx.chunks[i], v, false);
  });
  std::vector<Matrix> out(ctx.T);
  for (int t = 0; t < ctx.T; ++t) {
    out[t].resize(ctx.config.out(), ctx.n_total);
    int col = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      out[t].middleCols(col, ctx.chunks[i].batch.n) = parts[i].r_out[t];
      col += ctx.chunks[i].batch.n;
    }
  }
  return out;
}

Vector gauss_newton_product(const CurvatureContext& ctx, const Vector& v) {
  Vector out = reduce_chunks(ctx, v, true, ctx.mu);
  if (ctx.lambda != 0.0) out += ctx.lambda * v;
  return out;
}

Vector structural_curvature_product(const CurvatureContext& ctx, const Vector& v) {
  return reduce_chunks(ctx, v, false, 1.0);
}

}  // namespace hfseq
