// SPDX-License-Identifier: Apache-2.0
#include "hfseq/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace hfseq {

std::pair<Vocabulary, CorpusSplit> split_text(const std::u32string& text, const SplitSpec& spec) {
  const long total = static_cast<long>(text.size());
  long n_train = spec.train_chars >= 0 ? spec.train_chars
                                       : static_cast<long>(spec.train_frac * total);
  long n_val = spec.val_chars >= 0 ? spec.val_chars : static_cast<long>(spec.val_frac * total);
  long n_test = spec.test_chars >= 0 ? spec.test_chars : static_cast<long>(spec.test_frac * total);
  if (spec.train_chars < 0 && spec.val_chars < 0 && spec.test_chars < 0 &&
      spec.train_frac + spec.val_frac + spec.test_frac > 1.0 + 1e-12)
    throw ConfigError("split fractions must sum to at most 1");
  n_train = std::min(n_train, total);
  n_val = std::min(n_val, total - n_train);
  n_test = std::min(n_test, total - n_train - n_val);
  if (n_train <= 0) throw ConfigError("training split is empty");

  const std::u32string train_text = text.substr(0, n_train);
  Vocabulary vocab = Vocabulary::build(train_text);

  CorpusSplit split;
  split.train = vocab.encode(train_text);
  split.val = vocab.encode(text.substr(n_train, n_val));
  split.test = vocab.encode(text.substr(n_train + n_val, n_test));
  split.ranges = {0, static_cast<std::size_t>(n_train), static_cast<std::size_t>(n_train + n_val),
                  static_cast<std::size_t>(n_train + n_val + n_test)};
  return {std::move(vocab), std::move(split)};
}

std::pair<Vocabulary, CorpusSplit> load_corpus(const std::string& path, const SplitSpec& spec) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open corpus file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return split_text(decode_utf8(ss.str()), spec);
}

double unigram_entropy_bits(const std::vector<int>& ids) {
  if (ids.empty()) return 0.0;
  std::unordered_map<int, long> counts;
  for (int id : ids) ++counts[id];
  double h = 0.0;
  for (const auto& [id, c] : counts) {
    const double p = static_cast<double>(c) / ids.size();
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace hfseq
