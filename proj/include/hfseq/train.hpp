// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "hfseq/batching.hpp"
#include "hfseq/optimizer.hpp"
#include "hfseq/run_config.hpp"
#include "hfseq/vocab.hpp"

namespace hfseq {

// Data resolved for a run: either an encoded text corpus (real or generated)
// or the marked-addition batches.
struct TrainData {
  std::optional<Vocabulary> vocab;
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  bool marked_addition = false;
  Batch addition_val;
};

TrainData resolve_data(const RunConfig& cfg);
// Fills vocab_size (and the regression output shape) from the data.
ModelConfig resolve_model(const RunConfig& cfg, const TrainData& data);

// Mean bits/char of a symbol array, streamed over length-T windows with the
// hidden state carried between contiguous windows. n_streams > 1 splits the
// array into contiguous regions evaluated as one batch.
double evaluate_bits(const ModelConfig& config, const ParameterSet& params,
                     const std::vector<int>& ids, int T, int n_streams = 8, int workers = 1);

// Mean squared error over the batch's loss-bearing steps.
double evaluate_mse(const ModelConfig& config, const ParameterSet& params, const Batch& batch);

std::string metrics_header();
std::string metrics_line(const MetricsRow& row);

struct TrainOutcome {
  ModelConfig config;
  TrainState state;
  double best_val = 0.0;
  int iterations = 0;
  std::string stop_reason;
};

// Returning false stops the run after the current iteration.
using IterationCallback = std::function<bool(const MetricsRow&)>;

// Full training driver: data setup, init or resume, per-iteration batches,
// HF or SGD steps, validation metric, metrics stream, checkpoints, and the
// validation-patience stop. resume_checkpoint may be empty. When
// cfg.run.output_dir is empty nothing is written to disk.
TrainOutcome run_training(const RunConfig& cfg, const std::string& resume_checkpoint = "",
                          std::ostream* console = nullptr, const IterationCallback& cb = {});

}  // namespace hfseq
