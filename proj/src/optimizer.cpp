// SPDX-License-Identifier: Apache-2.0
#include "hfseq/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "parallel.hpp"

namespace hfseq {

DampingMode damping_mode_from_string(const std::string& s) {
  if (s == "structural") return DampingMode::structural;
  if (s == "line_search") return DampingMode::line_search;
  if (s == "tikhonov_plus_structural") return DampingMode::tikhonov_plus_structural;
  throw ConfigError("unknown damping mode '" + s + "'");
}

std::string to_string(DampingMode m) {
  switch (m) {
    case DampingMode::structural: return "structural";
    case DampingMode::line_search: return "line_search";
    case DampingMode::tikhonov_plus_structural: return "tikhonov_plus_structural";
  }
  return "?";
}

DampingState adjust_mu(const DampingState& state, double f_new, double f_old, double q_new,
                       double q_old) {
  if (q_new == q_old)
    throw ConfigError("adjust_mu: undefined ratio, q_new == q_old");
  DampingState out = state;
  const double p = (f_new - f_old) / (q_new - q_old);
  if (p < 0.25)
    out.mu = state.mu * 2.0 / 3.0;
  else if (p > 0.75)
    out.mu = state.mu * 3.0 / 2.0;
  return out;
}

namespace {

std::vector<Batch> split_batch(const Batch& batch, int chunk_size) {
  chunk_size = std::max(1, chunk_size);
  std::vector<Batch> chunks;
  for (int a = 0; a < batch.n; a += chunk_size) {
    std::vector<int> cols;
    for (int j = a; j < std::min(batch.n, a + chunk_size); ++j) cols.push_back(j);
    chunks.push_back(batch.columns(cols));
  }
  return chunks;
}

}  // namespace

GradientResult gradient_chunked(const ModelConfig& config, const ParameterSet& params,
                                const Batch& batch, int chunk_size, int workers) {
  const std::vector<Batch> chunks = split_batch(batch, chunk_size);
  std::vector<GradientResult> parts(chunks.size());
  detail::parallel_index(static_cast<int>(chunks.size()), workers,
                         [&](int i) { parts[i] = gradient(config, params, chunks[i]); });
  GradientResult total;
  total.grad = Vector::Zero(params.theta.size());
  total.peak_states = batch.T;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const double share = static_cast<double>(chunks[i].n) / batch.n;
    total.grad += parts[i].grad * share;
    loss_sum += parts[i].loss * share;
  }
  total.loss = loss_sum;
  total.bits_per_char = config.output_mode == OutputMode::softmax_xent
                            ? loss_sum / std::numbers::ln2
                            : loss_sum;
  return total;
}

double loss_chunked(const ModelConfig& config, const ParameterSet& params, const Batch& batch,
                    int chunk_size, int workers) {
  const std::vector<Batch> chunks = split_batch(batch, chunk_size);
  std::vector<double> parts(chunks.size(), 0.0);
  detail::parallel_index(static_cast<int>(chunks.size()), workers, [&](int i) {
    ForwardOptions opts;
    opts.store_outputs = false;
    parts[i] = forward(config, params, chunks[i], opts).loss;
  });
  double loss = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i)
    loss += parts[i] * (static_cast<double>(chunks[i].n) / batch.n);
  return loss;
}

LsDampedCg cg_line_search_damped(const std::function<Vector(const Vector&)>& apply_A,
                                 const Vector& b,
                                 const std::function<double(const Vector&)>& loss_at_step,
                                 double f0, const CgOptions& cg_options, double tau,
                                 int ls_max_iterations, int failure_cap) {
  LsDampedCg res;
  res.x_f = Vector::Zero(b.size());
  double current_loss = f0;
  CgOptions opts = cg_options;
  opts.x0 = nullptr;  // the loss-greedy update always starts from zero
  CgHook hook = [&](const CgIterationView& view) -> std::optional<std::string> {
    const Vector d = view.alpha * view.direction;
    auto eval = [&](double eps) { return loss_at_step(res.x_f + eps * d); };
    const LineSearchResult ls =
        backtracking_line_search(eval, current_loss, tau, ls_max_iterations);
    if (!ls.failed) {
      res.x_f += ls.epsilon * d;
      current_loss = ls.loss;
    } else if (++res.failures >= failure_cap) {
      return "line_search_failures";
    }
    return std::nullopt;
  };
  res.cg = conjugate_gradient(apply_A, b, opts, hook);
  res.x_q = res.cg.x;
  return res;
}

HfStepInfo hf_step(const ModelConfig& config, TrainState& state, const Batch& grad_batch,
                   const Batch& curv_batch, const HfOptions& options) {
  HfStepInfo info;
  state.damping.mu0 = state.damping.mu;

  GradientResult grad =
      gradient_chunked(config, state.params, grad_batch, options.chunk_size, options.workers);
  if (!grad.grad.allFinite())
    throw NumericError("hf_step: non-finite gradient at iteration " +
                       std::to_string(state.iteration + 1));
  info.train_loss = grad.loss;
  info.train_bits = grad.bits_per_char;
  info.grad_norm = grad.grad.norm();

  const bool line_search_mode = state.damping.mode == DampingMode::line_search;
  const double mu_eff = line_search_mode ? 0.0 : state.damping.mu;
  CurvatureContext ctx =
      CurvatureContext::build(config, state.params, curv_batch, mu_eff, state.damping.lambda,
                              options.chunk_size, options.workers, options.structural_target);
  auto apply_A = [&](const Vector& v) { return gauss_newton_product(ctx, v); };

  Vector update;
  Vector x_q;
  if (line_search_mode) {
    const double f0 = ctx.loss_at(Vector::Zero(state.params.theta.size()));
    LsDampedCg lsd = cg_line_search_damped(
        apply_A, grad.grad, [&](const Vector& s) { return ctx.loss_at(s); }, f0, options.cg,
        options.ls_tau, options.ls_max_iterations, options.ls_failure_cap);
    info.cg_iterations = lsd.cg.iterations;
    info.cg_stop = lsd.cg.stop_reason;
    info.ls_failures = lsd.failures;
    update = std::move(lsd.x_f);
    x_q = std::move(lsd.x_q);
    state.params.theta += update;
  } else {
    Vector x0;
    CgOptions cg_opts = options.cg;
    double q0 = 0.0;
    double f0;
    if (options.warm_start_decay > 0.0 && state.prev_solution.size() == state.params.theta.size()) {
      x0 = options.warm_start_decay * state.prev_solution;
      cg_opts.x0 = &x0;
      q0 = 0.5 * x0.dot(apply_A(x0)) + grad.grad.dot(x0);
      f0 = ctx.loss_at(x0);
    } else {
      f0 = ctx.loss_at(Vector::Zero(state.params.theta.size()));
    }

    CgHook hook = [&](const CgIterationView& view) -> std::optional<std::string> {
      if (view.iter % std::max(1, options.mu_check_interval) != 0) return std::nullopt;
      if (view.q == q0) return std::nullopt;
      const double f_i = ctx.loss_at(view.x);
      state.damping = adjust_mu(state.damping, f_i, f0, view.q, q0);
      if (state.damping.mu0 > 0.0 && state.damping.mu >= 3.0 * state.damping.mu0)
        return "mu_escalation";
      return std::nullopt;
    };
    CgResult cg = conjugate_gradient(apply_A, grad.grad, cg_opts, hook);
    info.cg_iterations = cg.iterations;
    info.cg_stop = cg.stop_reason;
    x_q = std::move(cg.x);

    // End-of-run backtracking search for the step size on the gradient
    // batch; a failed search leaves theta untouched.
    auto eval = [&](double eps) {
      const ParameterSet trial = add_scaled(state.params, x_q, eps);
      return loss_chunked(config, trial, grad_batch, options.chunk_size, options.workers);
    };
    const LineSearchResult ls =
        backtracking_line_search(eval, grad.loss, options.ls_tau, options.ls_max_iterations);
    info.ls_epsilon = ls.epsilon;
    info.ls_failed = ls.failed;
    if (!ls.failed) {
      state.params.theta += ls.epsilon * x_q;
    } else {
      info.applied = false;
    }
    update = x_q;
  }

  state.prev_solution = std::move(x_q);
  state.iteration += 1;
  info.mu_after = state.damping.mu;
  return info;
}

double sgd_step(const ModelConfig& config, ParameterSet& params, SgdState& state,
                const Batch& batch, double lr, double momentum, double clip_threshold,
                int chunk_size, int workers) {
  if (!(lr > 0)) throw ConfigError("sgd: learning rate must be positive");
  if (momentum < 0 || momentum >= 1) throw ConfigError("sgd: momentum must lie in [0, 1)");

  GradientResult g = gradient_chunked(config, params, batch, chunk_size, workers);
  if (!g.grad.allFinite()) throw NumericError("sgd: non-finite gradient");
  Vector eff = std::move(g.grad);
  if (clip_threshold > 0.0) {
    const double norm = eff.norm();
    if (norm > clip_threshold) eff *= clip_threshold / norm;
  }
  if (state.velocity.size() != params.theta.size())
    state.velocity = Vector::Zero(params.theta.size());
  state.velocity = momentum * state.velocity - lr * eff;
  params.theta += state.velocity;
  return g.loss;
}

}  // namespace hfseq
