// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hfseq/batch.hpp"
#include "hfseq/curvature.hpp"
#include "hfseq/model.hpp"
#include "hfseq/rng.hpp"

namespace hfseq::verify {

// Brute-force references, deliberately independent of the analytic
// backward/R code paths: they see the model only through forward losses and
// cached hidden states. They ship in the library so the gradcheck command
// can run them on user configurations.

struct OracleReport {
  std::string quantity;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  Index worst_index = -1;
  double tolerance = 0.0;
  bool pass = false;
  std::string text() const;
  std::string tsv_line() const;
};

// rel. error with denominator max(|a|, |b|, 1e-8)
double relative_error(double a, double b);
OracleReport compare(const std::string& quantity, const Vector& actual, const Vector& expected,
                     double tolerance);

// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h per
// coordinate. Refuses more than 5000 parameters.
Vector fd_gradient(const ModelConfig& config, const ParameterSet& params, const Batch& batch,
                   double h = 1e-5);

// Finite-difference Jacobian of the pre-softmax outputs (rows: t-major,
// output-dim-minor per sequence column block) used by the dense
// Gauss-Newton construction. Loss-weight-zero timesteps are skipped.
Matrix fd_logit_jacobian(const ModelConfig& config, const ParameterSet& params,
                         const Batch& batch, double h = 1e-5);

// Finite-difference Jacobian of the post-softmax (or linear) outputs.
Matrix fd_output_jacobian(const ModelConfig& config, const ParameterSet& params,
                          const Batch& batch, double h = 1e-5);

// Finite-difference Jacobian of the structural-damping hidden states (all
// layers, every timestep; H_out or H_state per the target switch).
Matrix fd_hidden_jacobian(const ModelConfig& config, const ParameterSet& params,
                          const Batch& batch,
                          StructuralTarget target = StructuralTarget::hidden_output,
                          double h = 1e-5);

// Dense J^T H_sigma J / (n*active) + mu * J_h^T J_h / (n*T) + lambda*I,
// with J built by central differences and H_sigma assembled densely per
// timestep. Refuses more than 500 parameters.
Matrix dense_gauss_newton(const ModelConfig& config, const ParameterSet& params,
                          const Batch& batch, double mu, double lambda,
                          StructuralTarget target = StructuralTarget::hidden_output,
                          double h = 1e-5);

// Solves A x = -b by dense Cholesky; throws on non-SPD input.
Vector direct_solve(const Matrix& a, const Vector& b);

// Small random batch matching the model's input/output shapes: random
// symbol ids for softmax text models, random dense inputs and targets for
// linear_mse models. Every timestep carries loss.
Batch random_probe_batch(const ModelConfig& config, int T, int n, Rng& rng);

}  // namespace hfseq::verify
