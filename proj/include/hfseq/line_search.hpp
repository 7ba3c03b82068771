// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace hfseq {

struct LineSearchResult {
  double epsilon = 1.0;
  double loss = 0.0;
  // True when no tested step improved on baseline_loss.
  bool failed = false;
  int evals = 0;
};

// Backtracking search over step scales: starts at epsilon = 1 and keeps
// decaying by tau while the decayed step improves, stopping at the first
// non-improvement. Non-finite evaluations count as non-improvements, so the
// search keeps decaying past overflow regions.
LineSearchResult backtracking_line_search(const std::function<double(double)>& eval_loss,
                                          double baseline_loss, double tau = 0.5,
                                          int max_iterations = 10);

}  // namespace hfseq
