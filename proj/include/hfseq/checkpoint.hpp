// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hfseq/layout.hpp"
#include "hfseq/model_config.hpp"

namespace hfseq {

// Checkpoint file layout:
//   "HFSEQ1\n"
//   key/value header lines: architecture, vocab_size, hidden_sizes (comma
//   separated), factor_size (0 when absent), output_size, output_mode,
//   extra_biases (0/1), param_count, seed
//   "theta\n"
//   param_count little-endian IEEE-754 doubles in layout order
// Round trips are bit-exact.
void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const ParameterSet& params);

struct Checkpoint {
  ModelConfig config;
  ParameterSet params;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace hfseq
