// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "hfseq/layout.hpp"
#include "hfseq/model_config.hpp"
#include "hfseq/vocab.hpp"

namespace hfseq {

struct SampleOptions {
  std::u32string context;
  long length = 0;
  std::uint64_t seed = 0;
  // Allowed output symbols; emission renormalizes over these, but the
  // recorded distributions always span the full vocabulary.
  std::optional<std::u32string> constraints;
  bool keep_distributions = false;
};

struct SampleRun {
  std::u32string text;
  // Full-vocabulary distribution before each emitted symbol (when kept).
  std::vector<Vector> distributions;
  int unk_substitutions = 0;  // context symbols outside the vocabulary
};

// Feeds the context, then repeatedly draws the next symbol from the
// (constraint-renormalized) output distribution and feeds it back.
// Deterministic for a given seed.
SampleRun sample(const ModelConfig& config, const ParameterSet& params, const Vocabulary& vocab,
                 const SampleOptions& options);

}  // namespace hfseq
