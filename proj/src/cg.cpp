// SPDX-License-Identifier: Apache-2.0
#include "hfseq/cg.hpp"

#include <cmath>

namespace hfseq {

CgResult conjugate_gradient(const std::function<Vector(const Vector&)>& apply_A,
                            const Vector& b, const CgOptions& options, const CgHook& hook) {
  if (options.max_iters < 1) throw ConfigError("cg: max_iters must be >= 1");
  if (options.progress_window < 1) throw ConfigError("cg: progress_window must be >= 1");
  if (!(options.progress_tol > 0)) throw ConfigError("cg: progress_tol must be > 0");

  const Index dim = b.size();
  CgResult res;
  res.x = options.x0 ? *options.x0 : Vector::Zero(dim);
  if (res.x.size() != dim) throw DimensionError("cg: x0 length must match b");

  // g is the quadratic's gradient A x + b, maintained incrementally; one
  // operator application per iteration.
  Vector g;
  if (options.x0 && options.x0->squaredNorm() != 0.0) {
    g = apply_A(res.x) + b;
  } else {
    g = b;
  }
  if (!g.allFinite()) throw NumericError("cg: operator returned non-finite values");

  // q(x) = x^T (g + b) / 2 since g = A x + b.
  auto q_at = [&](const Vector& x, const Vector& grad) { return 0.5 * x.dot(grad + b); };
  std::vector<double> q_hist;
  res.trace.q0 = q_at(res.x, g);
  q_hist.push_back(res.trace.q0);

  Vector s = -g;
  for (int i = 1; i <= options.max_iters; ++i) {
    if (g.norm() <= options.residual_tol) {
      res.stop_reason = "converged";
      return res;
    }
    Vector as = apply_A(s);
    if (!as.allFinite())
      throw NumericError("cg: operator returned non-finite values at iteration " +
                         std::to_string(i));
    const double s_as = s.dot(as);
    if (s_as <= 0.0) {
      if (s.squaredNorm() == 0.0) {
        res.stop_reason = "converged";
        return res;
      }
      throw PsdViolationError("cg: non-positive curvature s^T A s = " + std::to_string(s_as) +
                                  " at iteration " + std::to_string(i),
                              i);
    }
    const double alpha = -s.dot(g) / s_as;
    res.x += alpha * s;
    g += alpha * as;
    const double q = q_at(res.x, g);
    const double beta = g.dot(as) / s_as;

    CgIterate it;
    it.q = q;
    it.alpha = alpha;
    it.beta = beta;
    it.residual_norm = g.norm();
    if (options.record_iterates) {
      it.x = res.x;
      it.direction = s;
    }
    res.trace.iters.push_back(std::move(it));
    q_hist.push_back(q);
    res.iterations = i;

    if (hook) {
      CgIterationView view{i, res.x, q, alpha, s, g.norm()};
      if (auto reason = hook(view)) {
        res.stop_reason = *reason;
        return res;
      }
    }
    if (g.norm() <= options.residual_tol) {
      res.stop_reason = "converged";
      return res;
    }
    const int k = options.progress_window;
    if (i >= k && q < 0.0) {
      const double progress = (q - q_hist[i - k]) / q;
      if (progress < options.progress_tol * k) {
        res.stop_reason = "progress";
        return res;
      }
    }
    s = -g + beta * s;
  }
  res.stop_reason = "max_iters";
  return res;
}

}  // namespace hfseq
