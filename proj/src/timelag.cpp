// SPDX-License-Identifier: Apache-2.0
#include "hfseq/timelag.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "hfseq/rng.hpp"
#include "hfseq/stream_model.hpp"

namespace hfseq {

namespace {

// One constrained rollout; returns the raw per-step log10 ratios. The ratio
// is a logit difference, so it stays finite for any finite logits.
std::vector<double> run_trial(const ModelConfig& config, const ParameterSet& params,
                              const Vocabulary& vocab, const std::u32string& context,
                              const std::vector<int>& allowed, int steps, int open_id,
                              int close_id, Rng& rng) {
  StreamModel model(config, params);
  for (char32_t c : context) model.step(vocab.encode(c));
  std::vector<double> ratios;
  ratios.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    const Vector z = model.logits();
    ratios.push_back((z[close_id] - z[open_id]) / std::numbers::ln10);
    // constrained draw for the emitted symbol only
    const double m = z.maxCoeff();
    double total = 0.0;
    std::vector<double> w(allowed.size());
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      w[i] = std::exp(z[allowed[i]] - m);
      total += w[i];
    }
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int chosen = allowed.back();
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      acc += w[i];
      if (u < acc) {
        chosen = allowed[i];
        break;
      }
    }
    model.step(chosen);
  }
  return ratios;
}

}  // namespace

TimelagResult timelag_probe(const ModelConfig& config, const ParameterSet& params,
                            const Vocabulary& vocab, const TimelagOptions& options) {
  if (options.steps <= 0 || options.steps % 10 != 0)
    throw ConfigError("timelag: steps must be a positive multiple of 10");
  if (options.trials < 1) throw ConfigError("timelag: trials must be >= 1");
  if (!vocab.contains(U'[') || !vocab.contains(U']'))
    throw ConfigError("timelag: '[' and ']' must be in the vocabulary");
  const int open_id = vocab.encode(U'[');
  const int close_id = vocab.encode(U']');

  std::set<int> ids;
  for (char32_t c : options.allowed)
    if (vocab.contains(c)) ids.insert(vocab.encode(c));
  if (ids.empty()) throw ConfigError("timelag: no allowed symbols in the vocabulary");
  const std::vector<int> allowed(ids.begin(), ids.end());

  const int blocks = options.steps / 10;
  TimelagResult res;
  res.trials = options.trials;
  res.exp_mean.assign(blocks, 0.0);
  res.ctrl_mean.assign(blocks, 0.0);

  for (int trial = 0; trial < options.trials; ++trial) {
    for (int which = 0; which < 2; ++which) {
      Rng rng(options.seed, 0x746C6167ull + 2 * trial + which);
      const auto& context = which == 0 ? options.exp_context : options.ctrl_context;
      auto& mean = which == 0 ? res.exp_mean : res.ctrl_mean;
      const std::vector<double> raw = run_trial(config, params, vocab, context, allowed,
                                                options.steps, open_id, close_id, rng);
      for (int b = 0; b < blocks; ++b) {
        double s = 0.0;
        for (int j = 0; j < 10; ++j) s += raw[b * 10 + j];
        mean[b] += s / 10.0 / options.trials;
      }
    }
  }
  return res;
}

}  // namespace hfseq
