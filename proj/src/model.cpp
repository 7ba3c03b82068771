// SPDX-License-Identifier: Apache-2.0
#include "hfseq/model.hpp"

#include <cmath>
#include <numbers>

#include "arch.hpp"

namespace hfseq {
namespace detail {

namespace {

template <class Vec>
auto view(const ParamLayout& l, Vec& v, std::string_view name) {
  return l.view(v, name);
}

}  // namespace

RnnW rnn_weights(const ParamLayout& l, const Vector& v) {
  return {l.view(v, "W_hi"), l.view(v, "W_hh"), l.view(v, "W_oh"), l.view(v, "B_h")};
}
RnnG rnn_weights(const ParamLayout& l, Vector& v) {
  return {l.view(v, "W_hi"), l.view(v, "W_hh"), l.view(v, "W_oh"), l.view(v, "B_h")};
}

template <class Vec>
static LstmWeightsT<decltype(std::declval<const ParamLayout&>().view(std::declval<Vec&>(), ""))>
lstm_weights_impl(const ParamLayout& l, Vec& v) {
  LstmWeightsT<decltype(l.view(v, ""))> w{
      l.view(v, "W_hi"), l.view(v, "W_hh"), l.view(v, "W_wi"), l.view(v, "W_wh"),
      l.view(v, "W_fi"), l.view(v, "W_fh"), l.view(v, "W_ri"), l.view(v, "W_rh"),
      l.view(v, "W_oh"), {}, {}, {}, {}};
  if (l.has("B_c")) {
    w.b_c.emplace(l.view(v, "B_c"));
    w.b_w.emplace(l.view(v, "B_w"));
    w.b_f.emplace(l.view(v, "B_f"));
    w.b_r.emplace(l.view(v, "B_r"));
  }
  return w;
}
LstmW lstm_weights(const ParamLayout& l, const Vector& v) { return lstm_weights_impl(l, v); }
LstmG lstm_weights(const ParamLayout& l, Vector& v) { return lstm_weights_impl(l, v); }

MrnnW mrnn_weights(const ParamLayout& l, const Vector& v) {
  return {l.view(v, "W_hi"), l.view(v, "W_mi"), l.view(v, "W_mh"),
          l.view(v, "W_hm"), l.view(v, "W_oh"), l.view(v, "B_h")};
}
MrnnG mrnn_weights(const ParamLayout& l, Vector& v) {
  return {l.view(v, "W_hi"), l.view(v, "W_mi"), l.view(v, "W_mh"),
          l.view(v, "W_hm"), l.view(v, "W_oh"), l.view(v, "B_h")};
}

template <class Vec>
static MlstmWeightsT<decltype(std::declval<const ParamLayout&>().view(std::declval<Vec&>(), ""))>
mlstm_weights_impl(const ParamLayout& l, Vec& v) {
  MlstmWeightsT<decltype(l.view(v, ""))> w{
      l.view(v, "W_hi"), l.view(v, "W_wi"), l.view(v, "W_fi"), l.view(v, "W_ri"),
      l.view(v, "W_hm"), l.view(v, "W_wm"), l.view(v, "W_fm"), l.view(v, "W_rm"),
      l.view(v, "W_mi"), l.view(v, "W_mh"), l.view(v, "W_oh"), {}, {}, {}, {}};
  if (l.has("B_c")) {
    w.b_c.emplace(l.view(v, "B_c"));
    w.b_w.emplace(l.view(v, "B_w"));
    w.b_f.emplace(l.view(v, "B_f"));
    w.b_r.emplace(l.view(v, "B_r"));
  }
  return w;
}
MlstmW mlstm_weights(const ParamLayout& l, const Vector& v) { return mlstm_weights_impl(l, v); }
MlstmG mlstm_weights(const ParamLayout& l, Vector& v) { return mlstm_weights_impl(l, v); }

template <class Vec>
static StackedWeightsT<decltype(std::declval<const ParamLayout&>().view(std::declval<Vec&>(), ""))>
stacked_weights_impl(const ModelConfig& c, const ParamLayout& l, Vec& v) {
  StackedWeightsT<decltype(l.view(v, ""))> w;
  for (int li = 0; li < c.layers(); ++li) {
    const std::string s = "." + std::to_string(li + 1);
    StackedLayerWeightsT<decltype(l.view(v, ""))> lw{
        l.view(v, "W_mi" + s), l.view(v, "W_mh" + s), l.view(v, "W_hi" + s),
        l.view(v, "W_hm" + s), l.view(v, "W_oh" + s), l.view(v, "B_h" + s), {}};
    if (li > 0) lw.w_hh.emplace(l.view(v, "W_hh" + s));
    w.layer.push_back(std::move(lw));
  }
  return w;
}
StackedW stacked_weights(const ModelConfig& c, const ParamLayout& l, const Vector& v) {
  return stacked_weights_impl(c, l, v);
}
StackedG stacked_weights(const ModelConfig& c, const ParamLayout& l, Vector& v) {
  return stacked_weights_impl(c, l, v);
}

BackwardCarry BackwardCarry::zeros(const ModelConfig& config, int n) {
  BackwardCarry c;
  for (int h : config.hidden_sizes) c.h.push_back(Matrix::Zero(h, n));
  if (config.gated())
    for (int h : config.hidden_sizes) c.cell.push_back(Matrix::Zero(h, n));
  return c;
}

Seeds zero_seeds(const ModelConfig& config, int len, int n) {
  Seeds s(config.layers());
  for (int l = 0; l < config.layers(); ++l)
    s[l].assign(len, Matrix::Zero(config.hidden_sizes[l], n));
  return s;
}

void check_finite(const Matrix& h, int base, int t) {
  if (!h.allFinite())
    throw NumericError("non-finite activation at timestep " + std::to_string(base + t + 1),
                       base + t + 1);
}

void hidden_forward(const ModelConfig& config, const ParameterSet& p, const Batch& b,
                    int base, int len, const RecurrentState& init,
                    std::vector<LayerCache>& lc) {
  switch (config.architecture) {
    case Architecture::rnn:
      rnn_forward(rnn_weights(p.layout, p.theta), b, base, len, init, lc[0]);
      break;
    case Architecture::lstm:
      lstm_forward(lstm_weights(p.layout, p.theta), b, base, len, init, lc[0]);
      break;
    case Architecture::mrnn:
      mrnn_forward(mrnn_weights(p.layout, p.theta), b, base, len, init, lc[0]);
      break;
    case Architecture::stacked_mrnn:
      stacked_forward(stacked_weights(config, p.layout, p.theta), b, base, len, init, lc);
      break;
    case Architecture::mlstm:
      mlstm_forward(mlstm_weights(p.layout, p.theta), b, base, len, init, lc[0]);
      break;
  }
}

BackwardCarry hidden_backward(const ModelConfig& config, const ParameterSet& p, Vector& grad,
                              const Batch& b, int base, int len, const RecurrentState& init,
                              const std::vector<LayerCache>& lc, const Seeds& dh,
                              const Seeds* dcell, BackwardCarry carry) {
  switch (config.architecture) {
    case Architecture::rnn: {
      auto g = rnn_weights(p.layout, grad);
      return rnn_backward(rnn_weights(p.layout, p.theta), g, b, base, len, init, lc[0], dh, dcell,
                          std::move(carry));
    }
    case Architecture::lstm: {
      auto g = lstm_weights(p.layout, grad);
      return lstm_backward(lstm_weights(p.layout, p.theta), g, b, base, len, init, lc[0], dh,
                           dcell, std::move(carry));
    }
    case Architecture::mrnn: {
      auto g = mrnn_weights(p.layout, grad);
      return mrnn_backward(mrnn_weights(p.layout, p.theta), g, b, base, len, init, lc[0], dh,
                           dcell, std::move(carry));
    }
    case Architecture::stacked_mrnn: {
      auto g = stacked_weights(config, p.layout, grad);
      return stacked_backward(stacked_weights(config, p.layout, p.theta), g, b, base, len, init,
                              lc, dh, dcell, std::move(carry));
    }
    case Architecture::mlstm: {
      auto g = mlstm_weights(p.layout, grad);
      return mlstm_backward(mlstm_weights(p.layout, p.theta), g, b, base, len, init, lc[0], dh,
                            dcell, std::move(carry));
    }
  }
  throw ConfigError("unreachable architecture");
}

void hidden_rforward(const ModelConfig& config, const ParameterSet& p, const Vector& v,
                     const Batch& b, int base, int len, const RecurrentState& init,
                     const std::vector<LayerCache>& lc, Seeds& r_h, Seeds* r_cell) {
  switch (config.architecture) {
    case Architecture::rnn:
      rnn_rforward(rnn_weights(p.layout, p.theta), rnn_weights(p.layout, v), b, base, len, init,
                   lc[0], r_h, r_cell);
      break;
    case Architecture::lstm:
      lstm_rforward(lstm_weights(p.layout, p.theta), lstm_weights(p.layout, v), b, base, len,
                    init, lc[0], r_h, r_cell);
      break;
    case Architecture::mrnn:
      mrnn_rforward(mrnn_weights(p.layout, p.theta), mrnn_weights(p.layout, v), b, base, len,
                    init, lc[0], r_h, r_cell);
      break;
    case Architecture::stacked_mrnn:
      stacked_rforward(stacked_weights(config, p.layout, p.theta),
                       stacked_weights(config, p.layout, v), b, base, len, init, lc, r_h, r_cell);
      break;
    case Architecture::mlstm:
      mlstm_rforward(mlstm_weights(p.layout, p.theta), mlstm_weights(p.layout, v), b, base, len,
                     init, lc[0], r_h, r_cell);
      break;
  }
}

std::vector<ConstView> output_views(const ModelConfig& config, const ParamLayout& layout,
                                    const Vector& vec) {
  std::vector<ConstView> w;
  if (config.architecture == Architecture::stacked_mrnn) {
    for (int l = 0; l < config.layers(); ++l)
      w.push_back(layout.view(vec, "W_oh." + std::to_string(l + 1)));
  } else {
    w.push_back(layout.view(vec, "W_oh"));
  }
  return w;
}

static std::vector<ConstView> output_weights(const ModelConfig& config, const ParameterSet& p) {
  return output_views(config, p.layout, p.theta);
}

Matrix logits_at(const std::vector<ConstView>& w_oh, const std::vector<LayerCache>& lc, int t) {
  Matrix z = w_oh[0] * lc[0].h[t];
  for (std::size_t l = 1; l < w_oh.size(); ++l) z.noalias() += w_oh[l] * lc[l].h[t];
  return z;
}

Matrix softmax_columns(const Matrix& z) {
  Matrix o(z.rows(), z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    const double m = z.col(j).maxCoeff();
    o.col(j) = (z.col(j).array() - m).exp();
    o.col(j) /= o.col(j).sum();
  }
  return o;
}

// Summed loss over the columns of z at batch time t (unweighted, natural
// log); optionally emits the post-softmax/linear outputs.
double output_loss_t(const ModelConfig& config, const Matrix& z, const Batch& b, int t,
                     Matrix* o_out) {
  double loss = 0.0;
  if (config.output_mode == OutputMode::softmax_xent) {
    Matrix o(z.rows(), z.cols());
    for (Index j = 0; j < z.cols(); ++j) {
      const double m = z.col(j).maxCoeff();
      const Eigen::ArrayXd e = (z.col(j).array() - m).exp();
      const double sum = e.sum();
      const double lse = m + std::log(sum);
      o.col(j) = e / sum;
      if (b.has_dense_targets()) {
        const auto& gamma = b.target_dense[t].col(j);
        loss += lse * gamma.sum() - gamma.dot(z.col(j));
      } else {
        loss += lse - z(b.target_ids(t, j), j);
      }
    }
    if (o_out) *o_out = std::move(o);
  } else {
    const Matrix diff = z - b.target_dense[t];
    loss += 0.5 * diff.squaredNorm();
    if (o_out) *o_out = z;
  }
  return loss;
}

// d(summed loss at time t)/dz, before any weighting.
Matrix output_delta_t(const ModelConfig& config, const Matrix& z, const Batch& b, int t) {
  if (config.output_mode == OutputMode::softmax_xent) {
    Matrix d = softmax_columns(z);
    if (b.has_dense_targets()) {
      for (Index j = 0; j < z.cols(); ++j)
        d.col(j) = d.col(j) * b.target_dense[t].col(j).sum() - b.target_dense[t].col(j);
    } else {
      for (Index j = 0; j < z.cols(); ++j) d(b.target_ids(t, j), j) -= 1.0;
    }
    return d;
  }
  return z - b.target_dense[t];
}

}  // namespace detail

using namespace detail;

Matrix logits_from_cache(const ModelConfig& config, const ParameterSet& params,
                         const std::vector<LayerCache>& layers, int t) {
  return logits_at(output_weights(config, params), layers, t);
}

ForwardResult forward(const ModelConfig& config, const ParameterSet& params, const Batch& batch,
                      const ForwardOptions& options) {
  config.validate();
  batch.validate(config);
  if (params.theta.size() != params.layout.total())
    throw DimensionError("params theta length does not match layout");

  ForwardResult res;
  res.cache.T = batch.T;
  res.cache.n = batch.n;
  res.cache.initial =
      options.initial_state ? *options.initial_state : RecurrentState::zeros(config, batch.n);
  const auto w_oh = output_weights(config, params);
  double loss_sum = 0.0;

  const int k = options.checkpoint_interval;
  if (k <= 0) {
    res.cache.layers.resize(config.layers());
    hidden_forward(config, params, batch, 0, batch.T, res.cache.initial, res.cache.layers);
    if (options.store_outputs) res.cache.outputs.resize(batch.T);
    for (int t = 0; t < batch.T; ++t) {
      const Matrix z = logits_at(w_oh, res.cache.layers, t);
      Matrix o;
      loss_sum += batch.weight(t) *
                  output_loss_t(config, z, batch, t, options.store_outputs ? &o : nullptr);
      if (options.store_outputs) res.cache.outputs[t] = std::move(o);
    }
    res.final_state = res.cache.state_at(batch.T);
  } else {
    // Keep recurrent state at segment boundaries only.
    res.cache.checkpoint_interval = k;
    RecurrentState state = res.cache.initial;
    std::vector<LayerCache> scratch(config.layers());
    for (int a = 0; a < batch.T; a += k) {
      const int len = std::min(k, batch.T - a);
      res.cache.boundaries.push_back(state);
      hidden_forward(config, params, batch, a, len, state, scratch);
      for (int t = 0; t < len; ++t) {
        const Matrix z = logits_at(w_oh, scratch, t);
        loss_sum += batch.weight(a + t) * output_loss_t(config, z, batch, a + t, nullptr);
      }
      state.h.clear();
      state.cell.clear();
      for (const LayerCache& lc : scratch) {
        state.h.push_back(lc.h[len - 1]);
        if (!lc.cell.empty()) state.cell.push_back(lc.cell[len - 1]);
      }
    }
    res.final_state = state;
  }

  const double scale = 1.0 / (batch.n * batch.active_steps());
  res.loss = loss_sum * scale;
  if (!std::isfinite(res.loss)) throw NumericError("non-finite loss", batch.T);
  res.bits_per_char =
      config.output_mode == OutputMode::softmax_xent ? res.loss / std::numbers::ln2 : res.loss;
  return res;
}

namespace {

// Shared by the full-storage and checkpointed paths: builds the output-layer
// seeds and gradient contributions for local steps [0, len) of a segment,
// then runs the hidden backward over the segment.
BackwardCarry backward_segment(const ModelConfig& config, const ParameterSet& params,
                               Vector& grad, const Batch& batch, int base, int len,
                               const RecurrentState& init, const std::vector<LayerCache>& lc,
                               double scale, BackwardCarry carry) {
  const auto w_oh = output_weights(config, params);
  std::vector<MutView> g_oh;
  if (config.architecture == Architecture::stacked_mrnn) {
    for (int l = 0; l < config.layers(); ++l)
      g_oh.push_back(params.layout.view(grad, "W_oh." + std::to_string(l + 1)));
  } else {
    g_oh.push_back(params.layout.view(grad, "W_oh"));
  }
  // Reverse time order so segmented runs accumulate these sums in the same
  // global order as a single full pass (bit-identical results).
  Seeds dh = zero_seeds(config, len, batch.n);
  for (int t = len - 1; t >= 0; --t) {
    const double wt = batch.weight(base + t);
    if (wt == 0.0) continue;
    const Matrix z = logits_at(w_oh, lc, t);
    const Matrix dz = output_delta_t(config, z, batch, base + t) * (wt * scale);
    for (int l = 0; l < config.layers(); ++l) {
      g_oh[l].noalias() += dz * lc[l].h[t].transpose();
      dh[l][t].noalias() += w_oh[l].transpose() * dz;
    }
  }
  return hidden_backward(config, params, grad, batch, base, len, init, lc, dh, nullptr,
                         std::move(carry));
}

}  // namespace

GradientResult gradient(const ModelConfig& config, const ParameterSet& params,
                        const Batch& batch, const ForwardOptions& options) {
  ForwardOptions fwd = options;
  fwd.checkpoint_interval = 0;
  fwd.store_outputs = false;
  ForwardResult f = forward(config, params, batch, fwd);

  GradientResult res;
  res.loss = f.loss;
  res.bits_per_char = f.bits_per_char;
  res.peak_states = batch.T;
  res.grad = Vector::Zero(params.theta.size());
  const double scale = 1.0 / (batch.n * batch.active_steps());
  backward_segment(config, params, res.grad, batch, 0, batch.T, f.cache.initial, f.cache.layers,
                   scale, BackwardCarry::zeros(config, batch.n));
  return res;
}

GradientResult checkpointed_backward(const ModelConfig& config, const ParameterSet& params,
                                     const Batch& batch, int interval) {
  if (interval < 1 || interval > batch.T)
    throw ConfigError("checkpoint interval must lie in [1, T]");

  ForwardOptions fwd;
  fwd.checkpoint_interval = interval;
  ForwardResult f = forward(config, params, batch, fwd);

  GradientResult res;
  res.loss = f.loss;
  res.bits_per_char = f.bits_per_char;
  res.grad = Vector::Zero(params.theta.size());
  const double scale = 1.0 / (batch.n * batch.active_steps());

  // Segments in reverse order; each recomputes its activations from the
  // stored boundary state, consumes them, then frees both.
  std::vector<RecurrentState> boundaries = std::move(f.cache.boundaries);
  int live_boundaries = static_cast<int>(boundaries.size());
  res.peak_states = live_boundaries;
  BackwardCarry carry = BackwardCarry::zeros(config, batch.n);
  for (int s = live_boundaries - 1; s >= 0; --s) {
    const int a = s * interval;
    const int len = std::min(interval, batch.T - a);
    std::vector<LayerCache> scratch(config.layers());
    hidden_forward(config, params, batch, a, len, boundaries[s], scratch);
    res.peak_states = std::max(res.peak_states, live_boundaries + len);
    carry = backward_segment(config, params, res.grad, batch, a, len, boundaries[s], scratch,
                             scale, std::move(carry));
    boundaries[s] = RecurrentState{};
    --live_boundaries;
  }
  return res;
}

}  // namespace hfseq
