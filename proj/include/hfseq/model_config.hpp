// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfseq/types.hpp"

namespace hfseq {

enum class Architecture { rnn, lstm, mrnn, stacked_mrnn, mlstm };
enum class OutputMode { softmax_xent, linear_mse };

Architecture architecture_from_string(const std::string& s);
std::string to_string(Architecture a);
OutputMode output_mode_from_string(const std::string& s);
std::string to_string(OutputMode m);

struct ModelConfig {
  Architecture architecture = Architecture::rnn;
  // Input symbol count V. One-hot inputs have this dimensionality.
  int vocab_size = 0;
  // One entry except for stacked_mrnn, where it lists per-layer widths.
  std::vector<int> hidden_sizes;
  // Width of the multiplicative intermediate state. Required for mrnn,
  // stacked_mrnn and mlstm, and must equal hidden_sizes[0] for mlstm and
  // stacked_mrnn (stacked layers use their own widths as factor sizes).
  int factor_size = 0;
  // Output dimensionality; 0 means "same as vocab_size". Regression tasks
  // such as marked addition use a smaller output than input.
  int output_size = 0;
  OutputMode output_mode = OutputMode::softmax_xent;
  // Adds cell-input and gate biases to lstm/mlstm. Off by default: the base
  // cells carry no biases.
  bool extra_biases = false;
  std::uint64_t seed = 0;

  int hidden() const { return hidden_sizes.empty() ? 0 : hidden_sizes[0]; }
  int layers() const { return static_cast<int>(hidden_sizes.size()); }
  int out() const { return output_size > 0 ? output_size : vocab_size; }
  bool gated() const {
    return architecture == Architecture::lstm || architecture == Architecture::mlstm;
  }
  bool multiplicative() const {
    return architecture == Architecture::mrnn ||
           architecture == Architecture::stacked_mrnn ||
           architecture == Architecture::mlstm;
  }

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

struct InitScheme {
  enum class Kind { dense, sparse_recurrent };
  Kind kind = Kind::dense;
  // Standard deviation of the normal draws.
  double std = 0.1;
  // sparse_recurrent only: probability that a W_hh entry is zeroed.
  double p_zero = 0.9;

  static InitScheme dense(double std) { return {Kind::dense, std, 0.0}; }
  static InitScheme sparse_recurrent(double p_zero = 0.9, double std = 0.1) {
    return {Kind::sparse_recurrent, std, p_zero};
  }
};

}  // namespace hfseq
