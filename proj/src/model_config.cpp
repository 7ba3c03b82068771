// SPDX-License-Identifier: Apache-2.0
#include "hfseq/model_config.hpp"

namespace hfseq {

Architecture architecture_from_string(const std::string& s) {
  if (s == "rnn") return Architecture::rnn;
  if (s == "lstm") return Architecture::lstm;
  if (s == "mrnn") return Architecture::mrnn;
  if (s == "stacked_mrnn") return Architecture::stacked_mrnn;
  if (s == "mlstm") return Architecture::mlstm;
  throw ConfigError("unknown architecture '" + s +
                    "' (expected rnn, lstm, mrnn, stacked_mrnn or mlstm)");
}

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::rnn: return "rnn";
    case Architecture::lstm: return "lstm";
    case Architecture::mrnn: return "mrnn";
    case Architecture::stacked_mrnn: return "stacked_mrnn";
    case Architecture::mlstm: return "mlstm";
  }
  return "?";
}

OutputMode output_mode_from_string(const std::string& s) {
  if (s == "softmax_xent") return OutputMode::softmax_xent;
  if (s == "linear_mse") return OutputMode::linear_mse;
  throw ConfigError("unknown output_mode '" + s +
                    "' (expected softmax_xent or linear_mse)");
}

std::string to_string(OutputMode m) {
  return m == OutputMode::softmax_xent ? "softmax_xent" : "linear_mse";
}

void ModelConfig::validate() const {
  if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
  if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must be non-empty");
  for (int h : hidden_sizes)
    if (h <= 0) throw ConfigError("hidden_sizes entries must be positive");
  if (architecture != Architecture::stacked_mrnn && hidden_sizes.size() != 1)
    throw ConfigError("hidden_sizes must have exactly one entry for " + to_string(architecture));
  if (multiplicative()) {
    if (factor_size <= 0)
      throw ConfigError("factor_size is required for " + to_string(architecture));
    if (architecture == Architecture::mlstm && factor_size != hidden_sizes[0])
      throw ConfigError("mlstm requires factor_size == hidden_sizes[0]");
    if (architecture == Architecture::stacked_mrnn && factor_size != hidden_sizes[0])
      throw ConfigError("stacked_mrnn requires factor_size == hidden_sizes[0]; each layer's factor width equals its own hidden width");
  } else if (factor_size != 0) {
    throw ConfigError("factor_size must be absent for " + to_string(architecture));
  }
  if (output_size < 0) throw ConfigError("output_size must be non-negative");
}

}  // namespace hfseq
