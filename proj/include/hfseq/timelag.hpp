// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hfseq/layout.hpp"
#include "hfseq/model_config.hpp"
#include "hfseq/vocab.hpp"

namespace hfseq {

// Bracket-memory probe: give the model an opening context, let it emit only
// alphabetic characters and spaces, and watch how long the unconstrained
// distribution keeps favouring ']' over '['. A control context calibrates
// the baseline ratio.
struct TimelagOptions {
  std::u32string exp_context = U"[[";
  std::u32string ctrl_context = U"Th";
  int steps = 1000;  // must be divisible by the smoothing block of 10
  int trials = 10;
  std::uint64_t seed = 0;
  std::u32string allowed = U"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ ";
};

struct TimelagResult {
  // Mean log10 P(']')/P('[') per block of 10 steps, averaged over trials.
  std::vector<double> exp_mean;
  std::vector<double> ctrl_mean;
  int trials = 0;
  int block = 10;
};

TimelagResult timelag_probe(const ModelConfig& config, const ParameterSet& params,
                            const Vocabulary& vocab, const TimelagOptions& options);

}  // namespace hfseq
