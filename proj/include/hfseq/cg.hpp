// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hfseq/types.hpp"

namespace hfseq {

struct CgOptions {
  int max_iters = 100;
  // Progress rule: stop once (q(i) - q(i-k)) / q(i) < progress_tol * k,
  // checked only when i >= k and q(i) < 0.
  int progress_window = 10;
  double progress_tol = 0.0005;
  const Vector* x0 = nullptr;  // nullptr = zeros
  bool record_iterates = false;
  // Stop when the residual norm drops to this value (0 keeps only the
  // exact-zero check that fires on exact solutions).
  double residual_tol = 0.0;
};

struct CgIterate {
  double q = 0.0;
  double alpha = 0.0;
  double beta = 0.0;  // mixing factor used to build the *next* direction
  double residual_norm = 0.0;
  Vector x;          // filled when record_iterates
  Vector direction;  // filled when record_iterates
};

struct CgTrace {
  double q0 = 0.0;  // q at the starting point
  std::vector<CgIterate> iters;
};

// Snapshot handed to the per-iteration hook.
struct CgIterationView {
  int iter = 0;  // 1-based
  const Vector& x;
  double q = 0.0;
  double alpha = 0.0;
  const Vector& direction;
  double residual_norm = 0.0;
};

// Returns a stop reason to terminate CG after this iteration, nullopt to
// continue.
using CgHook = std::function<std::optional<std::string>(const CgIterationView&)>;

struct CgResult {
  Vector x;
  CgTrace trace;
  std::string stop_reason;  // converged | max_iters | progress | <hook reason>
  int iterations = 0;
};

// Minimizes q(x) = x^T A x / 2 + b^T x for a symmetric PSD operator given
// only through matrix-vector products. A caller solving A x = -g for a
// Newton-type step passes b = g. Throws PsdViolationError when a search
// direction has non-positive curvature and NumericError when apply_A
// returns non-finite values.
CgResult conjugate_gradient(const std::function<Vector(const Vector&)>& apply_A,
                            const Vector& b, const CgOptions& options = {},
                            const CgHook& hook = {});

}  // namespace hfseq
