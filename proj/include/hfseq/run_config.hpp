// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "hfseq/corpus.hpp"
#include "hfseq/model_config.hpp"
#include "hfseq/optimizer.hpp"
#include "hfseq/synthetic.hpp"

namespace hfseq {

// Everything a training run needs, parsed from a JSON config file. Unknown
// keys are rejected; defaults are documented in the README.
struct RunConfig {
  ModelConfig model;  // vocab_size 0 derives V from the training split
  InitScheme init;

  struct Optimizer {
    std::string algorithm = "hf";  // hf | sgd
    DampingMode damping = DampingMode::structural;
    // < 0 picks the architecture default: 0.01 rnn/lstm, 0.3 mrnn and
    // stacked_mrnn, 0.1 mlstm.
    double mu0 = -1.0;
    double lambda = 0.0;
    int cg_max_iters = 100;
    int cg_progress_window = 10;
    double cg_progress_tol = 0.0005;
    double warm_start_decay = 0.0;
    double ls_tau = 0.5;
    int ls_max_iterations = 10;
    int ls_failure_cap = 5;
    int mu_check_interval = 1;
    int max_train_iters = 50;
    int patience = 5;
    StructuralTarget structural_target = StructuralTarget::hidden_output;
    double sgd_lr = 0.01;
    double sgd_momentum = 0.9;
    double sgd_clip = 1.0;
  } opt;

  struct Data {
    std::string corpus_path;  // empty selects the synthetic task
    SplitSpec split;
    std::optional<SyntheticTask> synthetic;
    long synthetic_train_chars = 200000;
    long synthetic_val_chars = 20000;
    int addition_train_n = 512;
    int addition_val_n = 256;
  } data;

  struct BatchPlan {
    int T = 100;
    long grad_budget_chars = 0;  // 0 = every window each iteration
    double curv_fraction = 0.25;
    int chunk_size = 256;
  } batch;

  struct Run {
    std::string output_dir;
    int checkpoint_every = 1;
    int workers = 1;
    int eval_streams = 8;
    long val_budget_chars = 0;  // 0 = full validation split
  } run;

  double resolved_mu0() const;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  // FNV-1a hash of the canonical JSON dump, for the run manifest.
  std::string config_hash() const;
};

StructuralTarget structural_target_from_string(const std::string& s);
std::string to_string(StructuralTarget t);

}  // namespace hfseq
