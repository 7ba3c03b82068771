// SPDX-License-Identifier: Apache-2.0
#include "hfseq/run_config.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hfseq {

using nlohmann::json;

StructuralTarget structural_target_from_string(const std::string& s) {
  if (s == "hidden_output") return StructuralTarget::hidden_output;
  if (s == "cell_state") return StructuralTarget::cell_state;
  throw ConfigError("unknown structural_target '" + s + "'");
}

std::string to_string(StructuralTarget t) {
  return t == StructuralTarget::hidden_output ? "hidden_output" : "cell_state";
}

double RunConfig::resolved_mu0() const {
  if (opt.mu0 >= 0) return opt.mu0;
  switch (model.architecture) {
    case Architecture::rnn:
    case Architecture::lstm: return 0.01;
    case Architecture::mrnn:
    case Architecture::stacked_mrnn: return 0.3;
    case Architecture::mlstm: return 0.1;
  }
  return 0.01;
}

namespace {

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown config key '" + where + "." + item.key() + "'");
  }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(j, "", {"model", "init", "optimizer", "data", "batch", "run"});

  RunConfig cfg;
  if (j.contains("model")) {
    const json& m = j.at("model");
    require_keys(m, "model",
                 {"architecture", "vocab_size", "hidden_sizes", "factor_size", "output_size",
                  "output_mode", "extra_biases", "seed"});
    if (m.contains("architecture"))
      cfg.model.architecture = architecture_from_string(m.at("architecture").get<std::string>());
    get_if(m, "vocab_size", cfg.model.vocab_size);
    get_if(m, "hidden_sizes", cfg.model.hidden_sizes);
    get_if(m, "factor_size", cfg.model.factor_size);
    get_if(m, "output_size", cfg.model.output_size);
    if (m.contains("output_mode"))
      cfg.model.output_mode = output_mode_from_string(m.at("output_mode").get<std::string>());
    get_if(m, "extra_biases", cfg.model.extra_biases);
    get_if(m, "seed", cfg.model.seed);
  }
  if (j.contains("init")) {
    const json& i = j.at("init");
    require_keys(i, "init", {"scheme", "std", "p_zero"});
    if (i.contains("scheme")) {
      const std::string s = i.at("scheme").get<std::string>();
      if (s == "dense")
        cfg.init.kind = InitScheme::Kind::dense;
      else if (s == "sparse_recurrent")
        cfg.init.kind = InitScheme::Kind::sparse_recurrent;
      else
        throw ConfigError("unknown init scheme '" + s + "'");
    }
    get_if(i, "std", cfg.init.std);
    get_if(i, "p_zero", cfg.init.p_zero);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    require_keys(o, "optimizer",
                 {"algorithm", "damping", "mu0", "lambda", "cg_max_iters", "cg_progress_window",
                  "cg_progress_tol", "warm_start_decay", "ls_tau", "ls_max_iterations",
                  "ls_failure_cap", "mu_check_interval", "max_train_iters", "patience",
                  "structural_target", "sgd_lr", "sgd_momentum", "sgd_clip"});
    get_if(o, "algorithm", cfg.opt.algorithm);
    if (cfg.opt.algorithm != "hf" && cfg.opt.algorithm != "sgd")
      throw ConfigError("optimizer.algorithm must be 'hf' or 'sgd'");
    if (o.contains("damping"))
      cfg.opt.damping = damping_mode_from_string(o.at("damping").get<std::string>());
    get_if(o, "mu0", cfg.opt.mu0);
    get_if(o, "lambda", cfg.opt.lambda);
    get_if(o, "cg_max_iters", cfg.opt.cg_max_iters);
    get_if(o, "cg_progress_window", cfg.opt.cg_progress_window);
    get_if(o, "cg_progress_tol", cfg.opt.cg_progress_tol);
    get_if(o, "warm_start_decay", cfg.opt.warm_start_decay);
    get_if(o, "ls_tau", cfg.opt.ls_tau);
    get_if(o, "ls_max_iterations", cfg.opt.ls_max_iterations);
    get_if(o, "ls_failure_cap", cfg.opt.ls_failure_cap);
    get_if(o, "mu_check_interval", cfg.opt.mu_check_interval);
    get_if(o, "max_train_iters", cfg.opt.max_train_iters);
    get_if(o, "patience", cfg.opt.patience);
    if (o.contains("structural_target"))
      cfg.opt.structural_target =
          structural_target_from_string(o.at("structural_target").get<std::string>());
    get_if(o, "sgd_lr", cfg.opt.sgd_lr);
    get_if(o, "sgd_momentum", cfg.opt.sgd_momentum);
    get_if(o, "sgd_clip", cfg.opt.sgd_clip);
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    require_keys(d, "data",
                 {"corpus_path", "train_frac", "val_frac", "test_frac", "train_chars",
                  "val_chars", "test_chars", "synthetic", "synthetic_train_chars",
                  "synthetic_val_chars", "addition_train_n", "addition_val_n"});
    get_if(d, "corpus_path", cfg.data.corpus_path);
    get_if(d, "train_frac", cfg.data.split.train_frac);
    get_if(d, "val_frac", cfg.data.split.val_frac);
    get_if(d, "test_frac", cfg.data.split.test_frac);
    get_if(d, "train_chars", cfg.data.split.train_chars);
    get_if(d, "val_chars", cfg.data.split.val_chars);
    get_if(d, "test_chars", cfg.data.split.test_chars);
    get_if(d, "synthetic_train_chars", cfg.data.synthetic_train_chars);
    get_if(d, "synthetic_val_chars", cfg.data.synthetic_val_chars);
    get_if(d, "addition_train_n", cfg.data.addition_train_n);
    get_if(d, "addition_val_n", cfg.data.addition_val_n);
    if (d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      require_keys(s, "data.synthetic",
                   {"kind", "period", "span", "min_gap", "outside_min", "outside_max", "T"});
      SyntheticTask task;
      task.kind = synthetic_kind_from_string(s.at("kind").get<std::string>());
      get_if(s, "period", task.period);
      get_if(s, "span", task.span);
      get_if(s, "min_gap", task.min_gap);
      get_if(s, "outside_min", task.outside_min);
      get_if(s, "outside_max", task.outside_max);
      get_if(s, "T", task.T);
      cfg.data.synthetic = task;
    }
  }
  if (j.contains("batch")) {
    const json& b = j.at("batch");
    require_keys(b, "batch", {"T", "grad_budget_chars", "curv_fraction", "chunk_size"});
    get_if(b, "T", cfg.batch.T);
    get_if(b, "grad_budget_chars", cfg.batch.grad_budget_chars);
    get_if(b, "curv_fraction", cfg.batch.curv_fraction);
    get_if(b, "chunk_size", cfg.batch.chunk_size);
  }
  if (j.contains("run")) {
    const json& r = j.at("run");
    require_keys(r, "run",
                 {"output_dir", "checkpoint_every", "workers", "eval_streams",
                  "val_budget_chars"});
    get_if(r, "output_dir", cfg.run.output_dir);
    get_if(r, "checkpoint_every", cfg.run.checkpoint_every);
    get_if(r, "workers", cfg.run.workers);
    get_if(r, "eval_streams", cfg.run.eval_streams);
    get_if(r, "val_budget_chars", cfg.run.val_budget_chars);
  }
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["model"]["architecture"] = to_string(model.architecture);
  j["model"]["vocab_size"] = model.vocab_size;
  j["model"]["hidden_sizes"] = model.hidden_sizes;
  j["model"]["factor_size"] = model.factor_size;
  j["model"]["output_size"] = model.output_size;
  j["model"]["output_mode"] = to_string(model.output_mode);
  j["model"]["extra_biases"] = model.extra_biases;
  j["model"]["seed"] = model.seed;
  j["init"]["scheme"] =
      init.kind == InitScheme::Kind::dense ? "dense" : "sparse_recurrent";
  j["init"]["std"] = init.std;
  j["init"]["p_zero"] = init.p_zero;
  j["optimizer"]["algorithm"] = opt.algorithm;
  j["optimizer"]["damping"] = to_string(opt.damping);
  j["optimizer"]["mu0"] = opt.mu0;
  j["optimizer"]["lambda"] = opt.lambda;
  j["optimizer"]["cg_max_iters"] = opt.cg_max_iters;
  j["optimizer"]["cg_progress_window"] = opt.cg_progress_window;
  j["optimizer"]["cg_progress_tol"] = opt.cg_progress_tol;
  j["optimizer"]["warm_start_decay"] = opt.warm_start_decay;
  j["optimizer"]["ls_tau"] = opt.ls_tau;
  j["optimizer"]["ls_max_iterations"] = opt.ls_max_iterations;
  j["optimizer"]["ls_failure_cap"] = opt.ls_failure_cap;
  j["optimizer"]["mu_check_interval"] = opt.mu_check_interval;
  j["optimizer"]["max_train_iters"] = opt.max_train_iters;
  j["optimizer"]["patience"] = opt.patience;
  j["optimizer"]["structural_target"] = to_string(opt.structural_target);
  j["optimizer"]["sgd_lr"] = opt.sgd_lr;
  j["optimizer"]["sgd_momentum"] = opt.sgd_momentum;
  j["optimizer"]["sgd_clip"] = opt.sgd_clip;
  j["data"]["corpus_path"] = data.corpus_path;
  j["data"]["train_frac"] = data.split.train_frac;
  j["data"]["val_frac"] = data.split.val_frac;
  j["data"]["test_frac"] = data.split.test_frac;
  j["data"]["train_chars"] = data.split.train_chars;
  j["data"]["val_chars"] = data.split.val_chars;
  j["data"]["test_chars"] = data.split.test_chars;
  if (data.synthetic) {
    j["data"]["synthetic"]["kind"] = to_string(data.synthetic->kind);
    j["data"]["synthetic"]["period"] = data.synthetic->period;
    j["data"]["synthetic"]["span"] = data.synthetic->span;
    j["data"]["synthetic"]["min_gap"] = data.synthetic->min_gap;
    j["data"]["synthetic"]["outside_min"] = data.synthetic->outside_min;
    j["data"]["synthetic"]["outside_max"] = data.synthetic->outside_max;
    j["data"]["synthetic"]["T"] = data.synthetic->T;
    j["data"]["synthetic_train_chars"] = data.synthetic_train_chars;
    j["data"]["synthetic_val_chars"] = data.synthetic_val_chars;
    j["data"]["addition_train_n"] = data.addition_train_n;
    j["data"]["addition_val_n"] = data.addition_val_n;
  }
  j["batch"]["T"] = batch.T;
  j["batch"]["grad_budget_chars"] = batch.grad_budget_chars;
  j["batch"]["curv_fraction"] = batch.curv_fraction;
  j["batch"]["chunk_size"] = batch.chunk_size;
  j["run"]["output_dir"] = run.output_dir;
  j["run"]["checkpoint_every"] = run.checkpoint_every;
  j["run"]["workers"] = run.workers;
  j["run"]["eval_streams"] = run.eval_streams;
  j["run"]["val_budget_chars"] = run.val_budget_chars;
  return j.dump(2);
}

std::string RunConfig::config_hash() const {
  const std::string text = to_json_text();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace hfseq
