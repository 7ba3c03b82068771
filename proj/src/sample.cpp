// SPDX-License-Identifier: Apache-2.0
#include "hfseq/sample.hpp"

#include <cmath>
#include <set>

#include "hfseq/rng.hpp"
#include "hfseq/stream_model.hpp"

namespace hfseq {

namespace {

Vector softmax_vector(const Vector& z) {
  const double m = z.maxCoeff();
  Vector e = (z.array() - m).exp();
  return e / e.sum();
}

}  // namespace

SampleRun sample(const ModelConfig& config, const ParameterSet& params, const Vocabulary& vocab,
                 const SampleOptions& options) {
  if (config.output_mode != OutputMode::softmax_xent)
    throw ConfigError("sampling requires a softmax model");
  if (vocab.size() != config.vocab_size)
    throw ConfigError("vocabulary size does not match the model");

  std::vector<int> allowed;
  if (options.constraints) {
    std::set<int> ids;
    for (char32_t c : *options.constraints)
      if (vocab.contains(c)) ids.insert(vocab.encode(c));
    if (ids.empty())
      throw ConfigError("constraint set has no symbols in the vocabulary");
    allowed.assign(ids.begin(), ids.end());
  } else {
    for (int i = 0; i < vocab.size(); ++i) allowed.push_back(i);
  }

  SampleRun run;
  StreamModel model(config, params);
  Rng rng(options.seed, 0x73616D706C65ull);

  for (char32_t c : options.context) {
    if (!vocab.contains(c)) ++run.unk_substitutions;
    model.step(vocab.encode(c));
  }

  run.text.reserve(options.length);
  for (long i = 0; i < options.length; ++i) {
    const Vector dist = softmax_vector(model.logits());
    if (options.keep_distributions) run.distributions.push_back(dist);
    double total = 0.0;
    for (int id : allowed) total += dist[id];
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int chosen = allowed.back();
    for (int id : allowed) {
      acc += dist[id];
      if (u < acc) {
        chosen = id;
        break;
      }
    }
    run.text.push_back(vocab.decode(chosen));
    model.step(chosen);
  }
  return run;
}

}  // namespace hfseq
