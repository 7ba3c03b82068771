// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>
#include <vector>

#include "hfseq/model.hpp"
#include "hfseq/oracle.hpp"
#include "hfseq/stream_model.hpp"

using namespace hfseq;

namespace {

ModelConfig make_config(Architecture arch, int v, std::vector<int> hidden, int factor,
                        OutputMode mode = OutputMode::softmax_xent) {
  ModelConfig c;
  c.architecture = arch;
  c.vocab_size = v;
  c.hidden_sizes = std::move(hidden);
  c.factor_size = factor;
  c.output_mode = mode;
  c.seed = 7;
  return c;
}

std::vector<ModelConfig> all_architectures(int v = 5, OutputMode mode = OutputMode::softmax_xent) {
  return {
      make_config(Architecture::rnn, v, {4}, 0, mode),
      make_config(Architecture::lstm, v, {4}, 0, mode),
      make_config(Architecture::mrnn, v, {4}, 3, mode),
      make_config(Architecture::stacked_mrnn, v, {4, 3}, 4, mode),
      make_config(Architecture::mlstm, v, {4}, 4, mode),
  };
}

}  // namespace

TEST_CASE("zero-parameter rnn predicts the uniform distribution, 2 bits at V=4") {
  const ModelConfig config = make_config(Architecture::rnn, 4, {3}, 0);
  ParameterSet p{build_layout(config), Vector::Zero(build_layout(config).total())};
  Rng rng(3);
  const Batch b = verify::random_probe_batch(config, 6, 2, rng);
  const ForwardResult f = forward(config, p, b);
  for (const Matrix& o : f.cache.outputs) CHECK((o.array() - 0.25).abs().maxCoeff() == 0.0);
  CHECK(f.bits_per_char == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("zero-parameter lstm: half-open gates, zero states, log2(V) bits") {
  const ModelConfig config = make_config(Architecture::lstm, 5, {4}, 0);
  ParameterSet p{build_layout(config), Vector::Zero(build_layout(config).total())};
  Rng rng(4);
  const Batch b = verify::random_probe_batch(config, 5, 3, rng);
  const ForwardResult f = forward(config, p, b);
  const LayerCache& lc = f.cache.layers[0];
  for (int t = 0; t < b.T; ++t) {
    CHECK((lc.gate_w[t].array() == 0.5).all());
    CHECK((lc.gate_f[t].array() == 0.5).all());
    CHECK((lc.gate_r[t].array() == 0.5).all());
    CHECK(lc.cell[t].cwiseAbs().maxCoeff() == 0.0);
    CHECK(lc.h[t].cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(f.bits_per_char == doctest::Approx(std::log2(5.0)).epsilon(1e-15));
}

// Straight-line scalar transcription of the multiplicative LSTM recurrence,
// element loops only; the vectorized forward must reproduce it.
TEST_CASE("mlstm forward matches a scalar reference evaluator") {
  const ModelConfig config = make_config(Architecture::mlstm, 3, {2}, 2);
  Rng rng(7);
  const ParameterSet p = init_params(config, InitScheme::dense(0.5), rng);
  Batch b = verify::random_probe_batch(config, 3, 1, rng);

  const int V = 3, H = 2, T = 3;
  auto W = [&](const char* name, int r, int c) { return p.layout.view(p.theta, name)(r, c); };
  auto sigm = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  std::vector<double> h_prev(H, 0.0), cell_prev(H, 0.0);
  std::vector<std::vector<double>> ref_outputs;
  for (int t = 0; t < T; ++t) {
    std::vector<double> input(V, 0.0);
    input[b.input_ids(t, 0)] = 1.0;
    std::vector<double> chi(H), xi(H), m(H);
    for (int i = 0; i < H; ++i) {
      chi[i] = 0.0;
      for (int v = 0; v < V; ++v) chi[i] += W("W_mi", i, v) * input[v];
      xi[i] = 0.0;
      for (int j = 0; j < H; ++j) xi[i] += W("W_mh", i, j) * h_prev[j];
      m[i] = chi[i] * xi[i];
    }
    std::vector<double> c_in(H), gw(H), gf(H), gr(H), cell(H), h(H);
    for (int i = 0; i < H; ++i) {
      double a_c = 0.0, a_w = 0.0, a_f = 0.0, a_r = 0.0;
      for (int v = 0; v < V; ++v) {
        a_c += W("W_hi", i, v) * input[v];
        a_w += W("W_wi", i, v) * input[v];
        a_f += W("W_fi", i, v) * input[v];
        a_r += W("W_ri", i, v) * input[v];
      }
      for (int j = 0; j < H; ++j) {
        a_c += W("W_hm", i, j) * m[j];
        a_w += W("W_wm", i, j) * m[j];
        a_f += W("W_fm", i, j) * m[j];
        a_r += W("W_rm", i, j) * m[j];
      }
      gw[i] = sigm(a_w);
      gf[i] = sigm(a_f);
      gr[i] = sigm(a_r);
      c_in[i] = a_c;
      cell[i] = gf[i] * cell_prev[i] + gw[i] * c_in[i];
      h[i] = std::tanh(cell[i] * gr[i]);
    }
    std::vector<double> z(V, 0.0);
    double zmax = -1e300;
    for (int o = 0; o < V; ++o) {
      for (int j = 0; j < H; ++j) z[o] += W("W_oh", o, j) * h[j];
      zmax = std::max(zmax, z[o]);
    }
    double sum = 0.0;
    for (int o = 0; o < V; ++o) sum += std::exp(z[o] - zmax);
    std::vector<double> out(V);
    for (int o = 0; o < V; ++o) out[o] = std::exp(z[o] - zmax) / sum;
    ref_outputs.push_back(out);
    h_prev = h;
    cell_prev = cell;
  }

  const ForwardResult f = forward(config, p, b);
  double worst = 0.0;
  for (int t = 0; t < T; ++t)
    for (int o = 0; o < V; ++o)
      worst = std::max(worst, std::abs(f.cache.outputs[t](o, 0) - ref_outputs[t][o]));
  CHECK(worst < 1e-13);
}

TEST_CASE("softmax columns sum to one and states stay in range, every architecture") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    Rng rng(11);
    const ParameterSet p = init_params(config, InitScheme::dense(0.8), rng);
    const Batch b = verify::random_probe_batch(config, 7, 3, rng);
    const ForwardResult f = forward(config, p, b);
    for (int t = 0; t < b.T; ++t) {
      const Matrix& o = f.cache.outputs[t];
      CHECK((o.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK(o.minCoeff() > 0.0);
      CHECK(o.maxCoeff() < 1.0);
      for (const LayerCache& lc : f.cache.layers) {
        CHECK(lc.h[t].cwiseAbs().maxCoeff() < 1.0);
        for (const auto* gate : {&lc.gate_w, &lc.gate_f, &lc.gate_r}) {
          if (gate->empty()) continue;
          CHECK((*gate)[t].minCoeff() > 0.0);
          CHECK((*gate)[t].maxCoeff() < 1.0);
        }
      }
    }
  }
}

TEST_CASE("one-hot column gather equals the dense product bit for bit") {
  Rng rng(13);
  Matrix w(6, 9);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  Batch b;
  b.T = 4;
  b.n = 5;
  b.input_ids.resize(4, 5);
  for (int t = 0; t < 4; ++t)
    for (int j = 0; j < 5; ++j) b.input_ids(t, j) = static_cast<int>(rng.below(9));
  const ConstView wv(w.data(), w.rows(), w.cols());
  for (int t = 0; t < 4; ++t) {
    Matrix dense = Matrix::Zero(9, 5);
    for (int j = 0; j < 5; ++j) dense(b.input_ids(t, j), j) = 1.0;
    const Matrix gathered = input_product(wv, b, t);
    const Matrix full = w * dense;
    CHECK((gathered.array() == full.array()).all());
  }
}

TEST_CASE("lstm with gates saturated at one integrates its cell input exactly") {
  ModelConfig config = make_config(Architecture::lstm, 4, {3}, 0);
  config.extra_biases = true;
  ParameterSet p{build_layout(config), Vector::Zero(build_layout(config).total())};
  Rng rng(17);
  {
    auto w_hi = p.layout.view(p.theta, "W_hi");
    for (Index i = 0; i < w_hi.size(); ++i) w_hi.data()[i] = rng.normal();
    p.layout.view(p.theta, "B_w").setConstant(50.0);  // sigmoid(50) == 1.0 in double
    p.layout.view(p.theta, "B_f").setConstant(50.0);
    p.layout.view(p.theta, "B_r").setConstant(50.0);
  }
  const Batch b = verify::random_probe_batch(config, 8, 2, rng);
  const ForwardResult f = forward(config, p, b);
  const LayerCache& lc = f.cache.layers[0];
  Matrix running = Matrix::Zero(3, 2);
  for (int t = 0; t < b.T; ++t) {
    CHECK((lc.gate_w[t].array() == 1.0).all());
    CHECK((lc.gate_f[t].array() == 1.0).all());
    CHECK((lc.gate_r[t].array() == 1.0).all());
    running = (running.array() * 1.0 + 1.0 * lc.cell_in[t].array()).matrix();
    CHECK((lc.cell[t].array() == running.array()).all());
  }
}

TEST_CASE("hidden-state Jacobian products shrink or grow with the recurrent spectral norm") {
  const ModelConfig config = make_config(Architecture::rnn, 5, {12}, 0);
  for (double scale : {0.5, 2.0}) {
    CAPTURE(scale);
    ParameterSet p{build_layout(config), Vector::Zero(build_layout(config).total())};
    Rng rng(29);
    auto w_hh = p.layout.view(p.theta, "W_hh");
    Matrix w(12, 12);
    for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
    w = 0.5 * (w + w.transpose().eval());  // symmetric so the norm power law is clean
    const double top = Eigen::JacobiSVD<Matrix>(w).singularValues()(0);
    w_hh = w * (scale / top);
    if (scale < 1.0) {
      // small inputs keep tanh' just below one; decay is then guaranteed by
      // submultiplicativity. At scale 2 the state is left at the origin,
      // where the products are exactly the powers of W_hh.
      auto w_hi = p.layout.view(p.theta, "W_hi");
      for (Index i = 0; i < w_hi.size(); ++i) w_hi.data()[i] = 0.02 * rng.normal();
    }

    const Batch b = verify::random_probe_batch(config, 30, 1, rng);
    const ForwardResult f = forward(config, p, b);
    const LayerCache& lc = f.cache.layers[0];
    const int T = b.T;
    Matrix jac = Matrix::Identity(12, 12);
    std::vector<double> norms;
    for (int n = 1; n <= 20; ++n) {
      const Matrix& h = lc.h[T - n];
      const Matrix d = (1.0 - h.col(0).array().square()).matrix().asDiagonal();
      jac = jac * (d * Matrix(w_hh));
      norms.push_back(Eigen::JacobiSVD<Matrix>(jac).singularValues()(0));
    }
    for (std::size_t n = 5; n + 1 < norms.size(); ++n) {
      if (scale < 1.0)
        CHECK(norms[n + 1] < norms[n]);
      else
        CHECK(norms[n + 1] > norms[n]);
    }
  }
}

TEST_CASE("single-symbol streaming matches the batched forward pass") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    Rng rng(31);
    const ParameterSet p = init_params(config, InitScheme::dense(0.4), rng);
    const Batch b = verify::random_probe_batch(config, 6, 1, rng);
    const ForwardResult f = forward(config, p, b);
    StreamModel stream(config, p);
    for (int t = 0; t < b.T; ++t) {
      const Vector z = stream.step(b.input_ids(t, 0));
      const Matrix zb = logits_from_cache(config, p, f.cache.layers, t);
      CHECK((z - zb.col(0)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("checkpointed forward reproduces the loss and boundary states") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    Rng rng(37);
    const ParameterSet p = init_params(config, InitScheme::dense(0.4), rng);
    const Batch b = verify::random_probe_batch(config, 23, 2, rng);
    const ForwardResult full = forward(config, p, b);
    ForwardOptions opts;
    opts.checkpoint_interval = 5;
    const ForwardResult ck = forward(config, p, b, opts);
    CHECK(ck.loss == full.loss);
    CHECK(ck.cache.boundaries.size() == 5);  // ceil(23/5)
    for (std::size_t l = 0; l < full.final_state.h.size(); ++l)
      CHECK((ck.final_state.h[l].array() == full.final_state.h[l].array()).all());
  }
}

TEST_CASE("non-finite activations raise a numeric error naming the first timestep") {
  const ModelConfig config = make_config(Architecture::rnn, 4, {3}, 0);
  Rng rng(41);
  ParameterSet p = init_params(config, InitScheme::dense(0.2), rng);
  // poison the hidden bias so the very first step blows up
  p.theta[p.layout.spec("B_h").offset] = std::numeric_limits<double>::quiet_NaN();
  const Batch b = verify::random_probe_batch(config, 6, 2, rng);
  try {
    forward(config, p, b);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.timestep == 1);
  }
}

TEST_CASE("forward with a carried initial state continues the recurrence") {
  const ModelConfig config = make_config(Architecture::mlstm, 5, {4}, 4);
  Rng rng(43);
  const ParameterSet p = init_params(config, InitScheme::dense(0.4), rng);
  const Batch whole = verify::random_probe_batch(config, 10, 2, rng);
  // split the batch at t=6 and carry the state
  Batch first, second;
  first.T = 6;
  second.T = 4;
  first.n = second.n = 2;
  first.input_ids = whole.input_ids.topRows(6);
  first.target_ids = whole.target_ids.topRows(6);
  second.input_ids = whole.input_ids.bottomRows(4);
  second.target_ids = whole.target_ids.bottomRows(4);

  const ForwardResult a = forward(config, p, first);
  ForwardOptions opts;
  opts.initial_state = &a.final_state;
  const ForwardResult bres = forward(config, p, second, opts);
  const ForwardResult whole_res = forward(config, p, whole);
  for (int t = 0; t < 4; ++t)
    CHECK((bres.cache.outputs[t] - whole_res.cache.outputs[6 + t]).cwiseAbs().maxCoeff() <
          1e-14);
}
