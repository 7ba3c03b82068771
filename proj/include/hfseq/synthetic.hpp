// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hfseq/batch.hpp"
#include "hfseq/rng.hpp"

namespace hfseq {

// Built-in benchmark generators. All are pure functions of (parameters,
// seed-derived rng).
struct SyntheticTask {
  enum class Kind { periodic_text, bracket_language, marked_addition };
  Kind kind = Kind::periodic_text;

  // periodic_text
  std::string period = "abcdefgh";

  // bracket_language: "[[" ... "]]" episodes over filler text. An episode
  // spans at most `span` characters including both brackets; the filler gap
  // between them is uniform in [min_gap, span - 4]. Episodes never nest:
  // each "[[" closes before the next one opens.
  int span = 100;
  int min_gap = 10;
  int outside_min = 20;
  int outside_max = 60;

  // marked_addition
  int T = 30;
};

SyntheticTask::Kind synthetic_kind_from_string(const std::string& s);
std::string to_string(SyntheticTask::Kind k);

// Character stream for the text-valued tasks.
std::string generate_text(const SyntheticTask& task, long length, Rng& rng);

// Marked addition: inputs are 2 x n per step (value in [0,1); marker flag).
// Exactly two steps per sequence carry flag 1, and the only loss-bearing
// step is the last, whose 1-dim target is the sum of the two marked values.
Batch generate_marked_addition(int T, int n, Rng& rng);

}  // namespace hfseq
