// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "hfseq/types.hpp"

namespace hfseq {

// Decodes UTF-8 into Unicode scalar values; undecodable bytes become
// U+FFFD (which the vocabulary later folds into UNK).
std::u32string decode_utf8(const std::string& bytes);
std::string encode_utf8(const std::u32string& text);

// Character vocabulary: the distinct symbols of the training text sorted by
// code point take ids 0..V-2, and the reserved UNK id is V-1. Symbols never
// seen in training map to UNK.
class Vocabulary {
 public:
  static Vocabulary build(const std::u32string& training_text);

  int size() const { return static_cast<int>(id_to_symbol_.size()) + 1; }
  int unk_id() const { return static_cast<int>(id_to_symbol_.size()); }
  bool contains(char32_t c) const { return symbol_to_id_.count(c) != 0; }
  int encode(char32_t c) const;
  std::vector<int> encode(const std::u32string& text) const;
  // UNK decodes to U+FFFD.
  char32_t decode(int id) const;
  std::u32string decode(const std::vector<int>& ids) const;
  const std::vector<char32_t>& symbols() const { return id_to_symbol_; }

 private:
  std::vector<char32_t> id_to_symbol_;
  std::unordered_map<char32_t, int> symbol_to_id_;
};

}  // namespace hfseq
