// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "hfseq/checkpoint.hpp"
#include "hfseq/oracle.hpp"
#include "hfseq/sample.hpp"
#include "hfseq/timelag.hpp"
#include "hfseq/train.hpp"

namespace fs = std::filesystem;
using namespace hfseq;

namespace {

struct LoadedModel {
  ModelConfig config;
  ParameterSet params;
  Vocabulary vocab;
};

LoadedModel load_model(const std::string& config_path, const std::string& checkpoint_path) {
  const RunConfig cfg = RunConfig::from_json_file(config_path);
  TrainData data = resolve_data(cfg);
  if (!data.vocab) throw ConfigError("this command needs a text (character) model config");
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (ck.config.vocab_size != data.vocab->size()) {
    std::string msg = "vocabulary mismatch: checkpoint has V=" +
                      std::to_string(ck.config.vocab_size) + ", corpus yields V=" +
                      std::to_string(data.vocab->size());
    // If the run directory kept its vocab listing, name the divergent symbols.
    const fs::path vocab_file = fs::path(checkpoint_path).parent_path() / "vocab.txt";
    if (fs::exists(vocab_file)) {
      std::ifstream is(vocab_file);
      std::set<char32_t> trained;
      std::string line;
      while (std::getline(is, line)) {
        const std::u32string sym = decode_utf8(line);
        if (!sym.empty()) trained.insert(sym[0]);
      }
      std::string diff;
      int listed = 0;
      for (char32_t c : data.vocab->symbols())
        if (!trained.count(c) && listed++ < 20) diff += encode_utf8(std::u32string(1, c));
      for (char32_t c : trained)
        if (!data.vocab->contains(c) && listed++ < 40) diff += encode_utf8(std::u32string(1, c));
      if (!diff.empty()) msg += "; divergent symbols: '" + diff + "'";
    }
    throw ConfigError(msg);
  }
  return LoadedModel{ck.config, std::move(ck.params), std::move(*data.vocab)};
}

int cmd_train(const std::string& config_path, const std::string& resume, int workers,
              int max_iters) {
  RunConfig cfg = RunConfig::from_json_file(config_path);
  if (workers > 0) cfg.run.workers = workers;
  if (max_iters > 0) cfg.opt.max_train_iters = max_iters;
  const TrainOutcome out = run_training(cfg, resume, &std::cout);
  std::cerr << "stopped after " << out.iterations << " iterations (" << out.stop_reason
            << "), best validation " << out.best_val << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& split, int T_override, int streams) {
  const RunConfig cfg = RunConfig::from_json_file(config_path);
  if (cfg.data.corpus_path.empty() && !cfg.data.synthetic)
    throw ConfigError("eval needs a data section");
  LoadedModel m = load_model(config_path, checkpoint_path);

  std::vector<int> ids;
  if (!cfg.data.corpus_path.empty()) {
    auto [vocab, corpus] = load_corpus(cfg.data.corpus_path, cfg.data.split);
    if (split == "train") ids = std::move(corpus.train);
    else if (split == "val") ids = std::move(corpus.val);
    else if (split == "test") ids = std::move(corpus.test);
    else throw ConfigError("split must be train, val or test");
  } else {
    const TrainData data = resolve_data(cfg);
    ids = split == "train" ? data.train_ids : data.val_ids;
  }
  if (ids.size() < 2) throw ConfigError("selected split is empty");
  const int T = T_override > 0 ? T_override : cfg.batch.T;
  const double bits = evaluate_bits(m.config, m.params, ids, T, streams, cfg.run.workers);
  std::printf("%.6f\n", bits);
  return 0;
}

int cmd_sample(const std::string& config_path, const std::string& checkpoint_path,
               const std::string& context, long length, std::uint64_t seed,
               const std::string& constraints, const std::string& out_path) {
  LoadedModel m = load_model(config_path, checkpoint_path);
  SampleOptions opts;
  opts.context = decode_utf8(context);
  opts.length = length;
  opts.seed = seed;
  if (!constraints.empty()) opts.constraints = decode_utf8(constraints);
  const SampleRun run = sample(m.config, m.params, m.vocab, opts);
  if (run.unk_substitutions > 0)
    std::cerr << "warning: " << run.unk_substitutions
              << " context symbols outside the vocabulary were fed as UNK\n";
  const std::string text = encode_utf8(run.text);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream os(out_path, std::ios::binary);
    os << text;
  }
  return 0;
}

int cmd_timelag(const std::string& config_path, const std::string& checkpoint_path, int steps,
                int trials, const std::string& exp_context, const std::string& ctrl_context,
                std::uint64_t seed, const std::string& out_path) {
  LoadedModel m = load_model(config_path, checkpoint_path);
  TimelagOptions opts;
  opts.steps = steps;
  opts.trials = trials;
  opts.exp_context = decode_utf8(exp_context);
  opts.ctrl_context = decode_utf8(ctrl_context);
  opts.seed = seed;
  const TimelagResult res = timelag_probe(m.config, m.params, m.vocab, opts);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    os = &file;
  }
  *os << "block,exp_mean_log10_ratio,ctrl_mean_log10_ratio\n";
  for (std::size_t b = 0; b < res.exp_mean.size(); ++b) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g\n", b, res.exp_mean[b], res.ctrl_mean[b]);
    *os << buf;
  }
  return 0;
}

int cmd_gradcheck(const std::string& config_path, double h, double tolerance, bool all_archs,
                  bool curvature, int T, int n) {
  std::vector<ModelConfig> configs;
  if (all_archs) {
    for (const char* arch : {"rnn", "lstm", "mrnn", "stacked_mrnn", "mlstm"}) {
      for (const char* mode : {"softmax_xent", "linear_mse"}) {
        ModelConfig c;
        c.architecture = architecture_from_string(arch);
        c.vocab_size = 5;
        c.hidden_sizes = c.architecture == Architecture::stacked_mrnn ? std::vector<int>{4, 3}
                                                                      : std::vector<int>{4};
        if (c.multiplicative()) c.factor_size = 4;
        c.output_mode = output_mode_from_string(mode);
        c.seed = 12;
        configs.push_back(c);
      }
    }
  } else {
    const RunConfig cfg = RunConfig::from_json_file(config_path);
    ModelConfig c = cfg.model;
    if (c.vocab_size == 0) {
      const TrainData data = resolve_data(cfg);
      c = resolve_model(cfg, data);
    }
    configs.push_back(c);
  }

  bool all_pass = true;
  for (const ModelConfig& c : configs) {
    Rng rng(c.seed, 0x6763ull);
    const ParameterSet params = init_params(c, InitScheme::dense(0.3), rng);
    const Batch batch = verify::random_probe_batch(c, T, n, rng);
    const Vector analytic = gradient(c, params, batch).grad;
    const Vector fd = verify::fd_gradient(c, params, batch, h);
    verify::OracleReport rep = verify::compare(
        "gradient " + to_string(c.architecture) + "/" + to_string(c.output_mode), analytic, fd,
        tolerance);
    std::cout << rep.text() << "\n" << rep.tsv_line() << "\n";
    all_pass = all_pass && rep.pass;

    if (curvature && params.theta.size() <= 500) {
      CurvatureContext ctx = CurvatureContext::build(c, params, batch, 0.0, 0.0);
      const Matrix g_dense = verify::dense_gauss_newton(c, params, batch, 0.0, 0.0);
      Rng probe_rng(c.seed, 0x7072ull);
      double worst = 0.0;
      for (int k = 0; k < 5; ++k) {
        Vector v(params.theta.size());
        for (Index i = 0; i < v.size(); ++i) v[i] = probe_rng.normal();
        const Vector lhs = gauss_newton_product(ctx, v);
        const Vector rhs = g_dense * v;
        worst = std::max(worst, (lhs - rhs).norm() / std::max(rhs.norm(), 1e-12));
      }
      verify::OracleReport rep2;
      rep2.quantity = "curvature " + to_string(c.architecture) + "/" + to_string(c.output_mode);
      rep2.max_rel_error = worst;
      rep2.mean_rel_error = worst;
      rep2.tolerance = tolerance;
      rep2.pass = worst < tolerance;
      std::cout << rep2.text() << "\n" << rep2.tsv_line() << "\n";
      all_pass = all_pass && rep2.pass;
    }
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hessian-free training for recurrent character models"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, resume, split = "val", context, constraints,
              out_path, exp_context = "[[", ctrl_context = "Th";
  long length = 100;
  std::uint64_t seed = 0;
  int workers = 0, max_iters = 0, T_override = 0, streams = 8, steps = 1000, trials = 10;
  int probe_T = 6, probe_n = 2;
  double fd_h = 1e-5, tolerance = 1e-4;
  bool all_archs = false, curvature = false;

  auto* train = app.add_subcommand("train", "run a training configuration");
  train->add_option("--config", config_path)->required();
  train->add_option("--resume", resume, "checkpoint to resume from");
  train->add_option("--workers", workers, "override run.workers");
  train->add_option("--max-iters", max_iters, "override optimizer.max_train_iters");

  auto* eval = app.add_subcommand("eval", "bits/char of a checkpoint on a corpus split");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--checkpoint", checkpoint_path)->required();
  eval->add_option("--split", split, "train|val|test");
  eval->add_option("--T", T_override, "window length override");
  eval->add_option("--streams", streams, "parallel carried-state streams");

  auto* smp = app.add_subcommand("sample", "draw text from a checkpoint");
  smp->add_option("--config", config_path)->required();
  smp->add_option("--checkpoint", checkpoint_path)->required();
  smp->add_option("--context", context);
  smp->add_option("--length", length);
  smp->add_option("--seed", seed);
  smp->add_option("--constraints", constraints, "allowed output symbols");
  smp->add_option("--out", out_path);

  auto* tl = app.add_subcommand("timelag", "bracket-memory probe");
  tl->add_option("--config", config_path)->required();
  tl->add_option("--checkpoint", checkpoint_path)->required();
  tl->add_option("--steps", steps);
  tl->add_option("--trials", trials);
  tl->add_option("--exp-context", exp_context);
  tl->add_option("--ctrl-context", ctrl_context);
  tl->add_option("--seed", seed);
  tl->add_option("--out", out_path);

  auto* gc = app.add_subcommand("gradcheck", "finite-difference oracle checks");
  gc->add_option("--config", config_path);
  gc->add_option("--h", fd_h, "finite-difference step");
  gc->add_option("--tolerance", tolerance);
  gc->add_option("--T", probe_T, "probe sequence length");
  gc->add_option("--n", probe_n, "probe batch size");
  gc->add_flag("--all-architectures", all_archs, "check every architecture at probe size");
  gc->add_flag("--curvature", curvature, "also check Gauss-Newton products densely");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, resume, workers, max_iters);
    if (*eval) return cmd_eval(config_path, checkpoint_path, split, T_override, streams);
    if (*smp) return cmd_sample(config_path, checkpoint_path, context, length, seed, constraints,
                                out_path);
    if (*tl) return cmd_timelag(config_path, checkpoint_path, steps, trials, exp_context,
                                ctrl_context, seed, out_path);
    if (*gc) {
      if (!all_archs && config_path.empty())
        throw ConfigError("gradcheck needs --config or --all-architectures");
      return cmd_gradcheck(config_path, fd_h, tolerance, all_archs, curvature, probe_T, probe_n);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
