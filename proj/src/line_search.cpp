// SPDX-License-Identifier: Apache-2.0
#include "hfseq/line_search.hpp"

#include <cmath>
#include <limits>

#include "hfseq/types.hpp"

namespace hfseq {

LineSearchResult backtracking_line_search(const std::function<double(double)>& eval_loss,
                                          double baseline_loss, double tau,
                                          int max_iterations) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("line search: tau must lie in (0, 1)");
  if (max_iterations < 1) throw ConfigError("line search: max_iterations must be >= 1");

  auto guarded = [&](double eps) {
    const double v = eval_loss(eps);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  LineSearchResult res;
  res.epsilon = 1.0;
  res.loss = guarded(1.0);
  res.evals = 1;
  double eps = 1.0;
  for (int i = 0; i < max_iterations; ++i) {
    const double trial = guarded(tau * eps);
    ++res.evals;
    if (trial < res.loss) {
      eps *= tau;
      res.epsilon = eps;
      res.loss = trial;
    } else {
      break;
    }
  }
  res.failed = !(res.loss < baseline_loss);
  return res;
}

}  // namespace hfseq
