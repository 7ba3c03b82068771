// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hfseq/vocab.hpp"

namespace hfseq {

// Contiguous train/validation/test ranges over a character file, either as
// fractions of the total or as absolute character counts (counts win when
// both are set; -1 leaves a field unset).
struct SplitSpec {
  double train_frac = 0.9;
  double val_frac = 0.05;
  double test_frac = 0.05;
  long train_chars = -1;
  long val_chars = -1;
  long test_chars = -1;
};

struct CorpusSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  // Character offsets of the split boundaries in the decoded source.
  struct Provenance {
    std::size_t train_begin = 0, train_end = 0, val_end = 0, test_end = 0;
  } ranges;
};

// Builds the vocabulary from the training range only; validation and test
// symbols outside it encode to UNK.
std::pair<Vocabulary, CorpusSplit> split_text(const std::u32string& text, const SplitSpec& spec);
std::pair<Vocabulary, CorpusSplit> load_corpus(const std::string& path, const SplitSpec& spec);

// Order-0 entropy of a symbol array in bits per character.
double unigram_entropy_bits(const std::vector<int>& ids);

}  // namespace hfseq
