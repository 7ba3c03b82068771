// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hfseq/cg.hpp"
#include "hfseq/curvature.hpp"
#include "hfseq/line_search.hpp"
#include "hfseq/model.hpp"

namespace hfseq {

enum class DampingMode { structural, line_search, tikhonov_plus_structural };

DampingMode damping_mode_from_string(const std::string& s);
std::string to_string(DampingMode m);

struct DampingState {
  double mu = 0.0;
  double mu0 = 0.0;  // value at the start of the current CG run
  double lambda = 0.0;
  DampingMode mode = DampingMode::structural;
};

// p = (f_new - f_old) / (q_new - q_old); p < 0.25 scales mu by 2/3,
// p > 0.75 scales it by 3/2, anything else (including the boundaries,
// which are strict) leaves mu unchanged. Throws ConfigError when
// q_new == q_old makes the ratio undefined.
DampingState adjust_mu(const DampingState& state, double f_new, double f_old, double q_new,
                       double q_old);

// Per-iteration metrics appended by the training loop.
struct MetricsRow {
  int iteration = 0;
  double train_bits = 0.0;
  double val_bits = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  int cg_iterations = 0;
  std::string stop_reason;
  double ls_epsilon = 1.0;
};

struct TrainState {
  ParameterSet params;
  DampingState damping;
  Vector prev_solution;  // quadratic CG solution, for optional warm starts
  int iteration = 0;
  std::vector<MetricsRow> history;
};

struct HfOptions {
  CgOptions cg;
  double ls_tau = 0.5;
  int ls_max_iterations = 10;
  int ls_failure_cap = 5;
  // Evaluate the curvature-batch loss for mu adaptation every j-th CG
  // iteration (each evaluation is one forward pass).
  int mu_check_interval = 1;
  // 0 starts CG from zero; otherwise x0 = decay * previous solution.
  double warm_start_decay = 0.0;
  int chunk_size = 256;
  int workers = 1;
  StructuralTarget structural_target = StructuralTarget::hidden_output;
};

struct HfStepInfo {
  double train_loss = 0.0;
  double train_bits = 0.0;
  double grad_norm = 0.0;
  int cg_iterations = 0;
  std::string cg_stop;
  double ls_epsilon = 1.0;
  bool ls_failed = false;
  bool applied = true;  // false when the final line search rejected the step
  int ls_failures = 0;  // line-search damping mode only
  double mu_after = 0.0;
};

// One outer Hessian-free iteration: gradient on grad_batch, conjugate
// gradient against the damped Gauss-Newton operator built on curv_batch
// (a sequence subset of grad_batch), then the mode's step acceptance rule.
// Updates params, damping and prev_solution in place.
HfStepInfo hf_step(const ModelConfig& config, TrainState& state, const Batch& grad_batch,
                   const Batch& curv_batch, const HfOptions& options);

// CG where the parameter-space update x_f rescales each accepted direction
// by a backtracking line search on the real loss, while the quadratic
// iterate x_q advances as usual. CG stops after failure_cap failed searches.
struct LsDampedCg {
  Vector x_f;
  Vector x_q;
  CgResult cg;
  int failures = 0;
};
LsDampedCg cg_line_search_damped(const std::function<Vector(const Vector&)>& apply_A,
                                 const Vector& b,
                                 const std::function<double(const Vector&)>& loss_at_step,
                                 double f0, const CgOptions& cg_options, double tau,
                                 int ls_max_iterations, int failure_cap);

// Chunked, worker-parallel gradient/loss with reduction in fixed chunk
// order: results are identical for any worker count.
GradientResult gradient_chunked(const ModelConfig& config, const ParameterSet& params,
                                const Batch& batch, int chunk_size, int workers);
double loss_chunked(const ModelConfig& config, const ParameterSet& params, const Batch& batch,
                    int chunk_size, int workers);

struct SgdState {
  Vector velocity;
};

// v <- momentum * v - lr * clip(grad); theta <- theta + v. clip_threshold
// <= 0 disables clipping; otherwise gradients above the threshold norm are
// rescaled onto it. Returns the batch loss before the update.
double sgd_step(const ModelConfig& config, ParameterSet& params, SgdState& state,
                const Batch& batch, double lr, double momentum, double clip_threshold,
                int chunk_size = 256, int workers = 1);

}  // namespace hfseq
