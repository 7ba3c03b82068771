// SPDX-License-Identifier: Apache-2.0
#include "hfseq/train.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "hfseq/checkpoint.hpp"

namespace hfseq {

namespace fs = std::filesystem;
using nlohmann::json;

TrainData resolve_data(const RunConfig& cfg) {
  TrainData data;
  if (!cfg.data.corpus_path.empty()) {
    auto [vocab, split] = load_corpus(cfg.data.corpus_path, cfg.data.split);
    data.vocab = std::move(vocab);
    data.train_ids = std::move(split.train);
    data.val_ids = std::move(split.val);
    return data;
  }
  if (!cfg.data.synthetic)
    throw ConfigError("config needs either data.corpus_path or data.synthetic");
  const SyntheticTask& task = *cfg.data.synthetic;
  if (task.kind == SyntheticTask::Kind::marked_addition) {
    data.marked_addition = true;
    Rng rng(cfg.model.seed, 0x6164645F76616Cull);
    data.addition_val = generate_marked_addition(task.T, cfg.data.addition_val_n, rng);
    return data;
  }
  Rng rng(cfg.model.seed, 0x73796E67656Eull);
  const long total = cfg.data.synthetic_train_chars + cfg.data.synthetic_val_chars;
  const std::string text = generate_text(task, total, rng);
  SplitSpec spec;
  spec.train_chars = cfg.data.synthetic_train_chars;
  spec.val_chars = cfg.data.synthetic_val_chars;
  spec.test_chars = 0;
  auto [vocab, split] = split_text(decode_utf8(text), spec);
  data.vocab = std::move(vocab);
  data.train_ids = std::move(split.train);
  data.val_ids = std::move(split.val);
  return data;
}

ModelConfig resolve_model(const RunConfig& cfg, const TrainData& data) {
  ModelConfig m = cfg.model;
  if (data.marked_addition) {
    if (m.vocab_size == 0) m.vocab_size = 2;
    if (m.output_size == 0) m.output_size = 1;
    if (m.output_mode != OutputMode::linear_mse)
      throw ConfigError("marked_addition requires output_mode linear_mse");
    if (m.vocab_size != 2 || m.out() != 1)
      throw ConfigError("marked_addition uses 2 inputs (value, marker) and 1 output");
  } else {
    const int v = data.vocab->size();
    if (m.vocab_size == 0)
      m.vocab_size = v;
    else if (m.vocab_size != v)
      throw ConfigError("config vocab_size " + std::to_string(m.vocab_size) +
                        " does not match the corpus vocabulary (" + std::to_string(v) + ")");
  }
  m.validate();
  return m;
}

double evaluate_bits(const ModelConfig& config, const ParameterSet& params,
                     const std::vector<int>& ids, int T, int n_streams, int workers) {
  (void)workers;
  const long len = static_cast<long>(ids.size());
  if (len < 2) throw ConfigError("evaluation needs at least 2 characters");
  n_streams = std::max(1, n_streams);
  long region = (len - 1) / n_streams;
  while (n_streams > 1 && region < 2) region = (len - 1) / --n_streams;

  RecurrentState state = RecurrentState::zeros(config, n_streams);
  double loss_sum = 0.0;
  for (long s = 0; s < region; s += T) {
    const int wlen = static_cast<int>(std::min<long>(T, region - s));
    Batch b;
    b.T = wlen;
    b.n = n_streams;
    b.input_ids.resize(wlen, n_streams);
    b.target_ids.resize(wlen, n_streams);
    for (int j = 0; j < n_streams; ++j) {
      const long base = static_cast<long>(j) * region + s;
      for (int t = 0; t < wlen; ++t) {
        b.input_ids(t, j) = ids[base + t];
        b.target_ids(t, j) = ids[base + t + 1];
      }
    }
    ForwardOptions opts;
    opts.store_outputs = false;
    opts.initial_state = &state;
    ForwardResult f = forward(config, params, b, opts);
    loss_sum += f.loss * n_streams * wlen;
    state = std::move(f.final_state);
  }
  return loss_sum / (static_cast<double>(region) * n_streams) / std::numbers::ln2;
}

double evaluate_mse(const ModelConfig& config, const ParameterSet& params, const Batch& batch) {
  ForwardOptions opts;
  opts.store_outputs = false;
  // loss is (squared error)/2 averaged over loss-bearing steps and sequences
  return 2.0 * forward(config, params, batch, opts).loss;
}

std::string metrics_header() {
  return "iteration,train_bits,val_bits,mu,lambda,cg_iterations,stop_reason,ls_epsilon";
}

std::string metrics_line(const MetricsRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%d,%s,%.12g", row.iteration,
                row.train_bits, row.val_bits, row.mu, row.lambda, row.cg_iterations,
                row.stop_reason.c_str(), row.ls_epsilon);
  return buf;
}

namespace {

std::string sidecar_path(const std::string& checkpoint_path) {
  const std::string suffix = ".hfseq";
  std::string p = checkpoint_path;
  if (p.size() >= suffix.size() && p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0)
    p.resize(p.size() - suffix.size());
  return p + ".state.json";
}

void write_state_sidecar(const std::string& checkpoint_path, const TrainState& state,
                         double best_val, int since_best) {
  json j;
  j["iteration"] = state.iteration;
  j["mu"] = state.damping.mu;
  j["lambda"] = state.damping.lambda;
  j["mode"] = to_string(state.damping.mode);
  j["best_val"] = best_val;
  j["since_best"] = since_best;
  std::ofstream os(sidecar_path(checkpoint_path));
  if (!os) throw IoError("cannot write " + sidecar_path(checkpoint_path));
  os << j.dump(2) << "\n";
}

}  // namespace

TrainOutcome run_training(const RunConfig& cfg, const std::string& resume_checkpoint,
                          std::ostream* console, const IterationCallback& cb) {
  const TrainData data = resolve_data(cfg);
  const ModelConfig config = resolve_model(cfg, data);

  TrainOutcome out;
  out.config = config;
  TrainState& state = out.state;
  state.damping.mu = cfg.resolved_mu0();
  state.damping.lambda = cfg.opt.lambda;
  state.damping.mode = cfg.opt.damping;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;

  if (!resume_checkpoint.empty()) {
    Checkpoint ck = load_checkpoint(resume_checkpoint);
    if (ck.params.theta.size() != ParamLayout::build(config).total())
      throw ConfigError("resume checkpoint does not match the configured model");
    state.params = std::move(ck.params);
    std::ifstream is(sidecar_path(resume_checkpoint));
    if (is) {
      json j = json::parse(is);
      state.iteration = j.value("iteration", 0);
      state.damping.mu = j.value("mu", state.damping.mu);
      state.damping.lambda = j.value("lambda", state.damping.lambda);
      best_val = j.value("best_val", best_val);
      since_best = j.value("since_best", 0);
    }
  } else {
    Rng rng(config.seed, 0x696E6974ull);
    state.params = init_params(config, cfg.init, rng);
  }

  // Run directory artifacts: config echo, manifest, metrics stream, vocab.
  std::ofstream metrics;
  const bool persist = !cfg.run.output_dir.empty();
  if (persist) {
    fs::create_directories(cfg.run.output_dir);
    const fs::path dir(cfg.run.output_dir);
    {
      std::ofstream os(dir / "config.json");
      os << cfg.to_json_text() << "\n";
    }
    {
      json manifest;
      manifest["config_hash"] = cfg.config_hash();
      manifest["seed"] = config.seed;
      manifest["code_version"] = "hfseq 0.1.0";
      manifest["architecture"] = to_string(config.architecture);
      manifest["param_count"] = ParamLayout::build(config).total();
      std::ofstream os(dir / "manifest.json");
      os << manifest.dump(2) << "\n";
    }
    if (data.vocab) {
      std::ofstream os(dir / "vocab.txt");
      for (char32_t c : data.vocab->symbols())
        os << encode_utf8(std::u32string(1, c)) << "\n";
    }
    const bool resuming = !resume_checkpoint.empty();
    metrics.open(dir / "metrics.csv", resuming ? std::ios::app : std::ios::trunc);
    if (!resuming) metrics << metrics_header() << "\n";
  }
  if (console && resume_checkpoint.empty()) *console << metrics_header() << "\n";

  HfOptions hf_opts;
  hf_opts.cg.max_iters = cfg.opt.cg_max_iters;
  hf_opts.cg.progress_window = cfg.opt.cg_progress_window;
  hf_opts.cg.progress_tol = cfg.opt.cg_progress_tol;
  hf_opts.ls_tau = cfg.opt.ls_tau;
  hf_opts.ls_max_iterations = cfg.opt.ls_max_iterations;
  hf_opts.ls_failure_cap = cfg.opt.ls_failure_cap;
  hf_opts.mu_check_interval = cfg.opt.mu_check_interval;
  hf_opts.warm_start_decay = cfg.opt.warm_start_decay;
  hf_opts.chunk_size = cfg.batch.chunk_size;
  hf_opts.workers = cfg.run.workers;
  hf_opts.structural_target = cfg.opt.structural_target;

  std::optional<BatchStream> stream;
  if (!data.marked_addition)
    stream.emplace(data.train_ids, cfg.batch.T, cfg.batch.grad_budget_chars, config.seed);
  std::vector<int> val_ids = data.val_ids;
  if (cfg.run.val_budget_chars > 0 &&
      static_cast<long>(val_ids.size()) > cfg.run.val_budget_chars)
    val_ids.resize(cfg.run.val_budget_chars);

  SgdState sgd_state;
  out.stop_reason = "max_iters";
  while (state.iteration < cfg.opt.max_train_iters) {
    const long it = state.iteration + 1;
    Batch grad_batch;
    if (data.marked_addition) {
      Rng rng(config.seed, 0x616464ull + it);
      grad_batch = generate_marked_addition(cfg.data.synthetic->T, cfg.data.addition_train_n, rng);
    } else {
      grad_batch = stream->next(it);
    }
    MetricsRow row;
    row.iteration = static_cast<int>(it);
    row.lambda = state.damping.lambda;

    if (cfg.opt.algorithm == "hf") {
      Rng curv_rng(config.seed, 0x63757276ull + it);
      Batch curv_batch = curvature_subset(grad_batch, cfg.batch.curv_fraction, curv_rng);
      const HfStepInfo info = hf_step(config, state, grad_batch, curv_batch, hf_opts);
      row.train_bits = info.train_bits;
      row.mu = info.mu_after;
      row.cg_iterations = info.cg_iterations;
      row.stop_reason = info.cg_stop;
      row.ls_epsilon = info.applied ? info.ls_epsilon : 0.0;
    } else {
      const double loss = sgd_step(config, state.params, sgd_state, grad_batch, cfg.opt.sgd_lr,
                                   cfg.opt.sgd_momentum, cfg.opt.sgd_clip, cfg.batch.chunk_size,
                                   cfg.run.workers);
      state.iteration += 1;
      row.train_bits =
          config.output_mode == OutputMode::softmax_xent ? loss / std::numbers::ln2 : loss;
      row.stop_reason = "sgd";
      row.mu = cfg.opt.sgd_momentum;
    }

    row.val_bits = data.marked_addition
                       ? evaluate_mse(config, state.params, data.addition_val)
                       : evaluate_bits(config, state.params, val_ids, cfg.batch.T,
                                       cfg.run.eval_streams, cfg.run.workers);
    state.history.push_back(row);
    const std::string line = metrics_line(row);
    if (metrics.is_open()) metrics << line << "\n" << std::flush;
    if (console) *console << line << "\n";

    if (row.val_bits < best_val) {
      best_val = row.val_bits;
      since_best = 0;
    } else {
      ++since_best;
    }

    if (persist && cfg.run.checkpoint_every > 0 &&
        state.iteration % cfg.run.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%04d.hfseq", state.iteration);
      const std::string path = (fs::path(cfg.run.output_dir) / name).string();
      save_checkpoint(path, config, state.params);
      write_state_sidecar(path, state, best_val, since_best);
    }

    if (cb && !cb(row)) {
      out.stop_reason = "callback";
      break;
    }
    if (since_best >= cfg.opt.patience) {
      out.stop_reason = "patience";
      break;
    }
  }

  if (persist) {
    const std::string path = (fs::path(cfg.run.output_dir) / "final.hfseq").string();
    save_checkpoint(path, config, state.params);
    write_state_sidecar(path, state, best_val, since_best);
  }
  out.best_val = best_val;
  out.iterations = state.iteration;
  return out;
}

}  // namespace hfseq
