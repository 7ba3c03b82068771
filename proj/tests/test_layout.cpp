// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numeric>

#include "hfseq/layout.hpp"

using namespace hfseq;

namespace {

ModelConfig make_config(Architecture arch, int v, std::vector<int> hidden, int factor,
                        int out = 0) {
  ModelConfig c;
  c.architecture = arch;
  c.vocab_size = v;
  c.hidden_sizes = std::move(hidden);
  c.factor_size = factor;
  c.output_size = out;
  return c;
}

// Independent closed-form parameter counts (out = V unless stated).
long rnn_count(long v, long h) { return h * v + h * h + v * h + h; }
long lstm_count(long v, long h) { return 4 * h * v + 4 * h * h + v * h; }
long mrnn_count(long v, long h, long m) { return h * v + m * v + m * h + h * m + v * h + h; }
long mlstm_count(long v, long h, long m) {
  return 4 * h * v + 4 * h * m + m * v + m * h + v * h;
}
long stacked_count(long v, const std::vector<int>& hs) {
  long total = 0;
  long below = 0;
  for (long h : hs) {
    total += h * v + h * h;          // W_mi.l, W_mh.l
    total += h * v + h * h;          // W_hi.l, W_hm.l
    if (below > 0) total += h * below;  // W_hh.l
    total += v * h + h;              // W_oh.l, B_h.l
    below = h;
  }
  return total;
}

}  // namespace

TEST_CASE("parameter counts match the published model sizes") {
  CHECK(build_layout(make_config(Architecture::rnn, 4, {3}, 0)).total() == 36);
  CHECK(build_layout(make_config(Architecture::rnn, 70, {400}, 0)).total() == 216400);
  CHECK(build_layout(make_config(Architecture::lstm, 70, {195}, 0)).total() == 220350);
  CHECK(build_layout(make_config(Architecture::mrnn, 70, {280}, 280)).total() == 215880);
  CHECK(build_layout(make_config(Architecture::stacked_mrnn, 70, {150, 130, 110}, 150)).total() ==
        219090);
  CHECK(build_layout(make_config(Architecture::mlstm, 70, {170}, 170)).total() == 215900);
}

TEST_CASE("tiny mlstm layout enumerates to the descriptor sum") {
  // Enumerated by hand for V=4, h=m=3: the four input matrices (3x4 each),
  // the four factor-to-cell/gate matrices (3x3), W_mi (3x4), W_mh (3x3) and
  // W_oh (4x3).
  const long expected = 4 * (3 * 4) + 4 * (3 * 3) + (3 * 4) + (3 * 3) + (4 * 3);
  CHECK(expected == 117);
  const ParamLayout layout = build_layout(make_config(Architecture::mlstm, 4, {3}, 3));
  CHECK(layout.total() == expected);
  long sum = 0;
  for (const MatrixSpec& s : layout.specs()) sum += s.rows * s.cols;
  CHECK(sum == expected);
}

TEST_CASE("layouts partition the vector exactly and match closed forms") {
  Rng rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    const int v = 2 + static_cast<int>(rng.below(8));
    const int h = 1 + static_cast<int>(rng.below(9));
    const int m = 1 + static_cast<int>(rng.below(9));
    const int h2 = 1 + static_cast<int>(rng.below(6));
    struct Case {
      ModelConfig config;
      long expected;
    };
    const Case cases[] = {
        {make_config(Architecture::rnn, v, {h}, 0), rnn_count(v, h)},
        {make_config(Architecture::lstm, v, {h}, 0), lstm_count(v, h)},
        {make_config(Architecture::mrnn, v, {h}, m), mrnn_count(v, h, m)},
        {make_config(Architecture::stacked_mrnn, v, {h, h2}, h), stacked_count(v, {h, h2})},
        {make_config(Architecture::mlstm, v, {h}, h), mlstm_count(v, h, h)},
    };
    for (const Case& c : cases) {
      const ParamLayout layout = build_layout(c.config);
      CHECK(layout.total() == c.expected);
      // slices are contiguous, ordered and gap-free
      Index offset = 0;
      for (const MatrixSpec& s : layout.specs()) {
        CHECK(s.offset == offset);
        offset += s.rows * s.cols;
      }
      CHECK(offset == layout.total());
    }
  }
}

TEST_CASE("views round-trip the flat vector exactly") {
  const ModelConfig config = make_config(Architecture::mlstm, 5, {4}, 4);
  Rng rng(17);
  ParameterSet p = init_params(config, InitScheme::dense(0.2), rng);
  Vector rebuilt = Vector::Zero(p.theta.size());
  for (const MatrixSpec& s : p.layout.specs()) {
    const Matrix block = p.layout.view(p.theta, s.name);
    p.layout.view(rebuilt, s.name) = block;
  }
  CHECK((rebuilt.array() == p.theta.array()).all());
}

TEST_CASE("config validation rejects inconsistent settings") {
  CHECK_THROWS_AS(build_layout(make_config(Architecture::mrnn, 5, {4}, 0)), ConfigError);
  CHECK_THROWS_AS(build_layout(make_config(Architecture::rnn, 5, {4}, 3)), ConfigError);
  CHECK_THROWS_AS(build_layout(make_config(Architecture::mlstm, 5, {4}, 3)), ConfigError);
  CHECK_THROWS_AS(build_layout(make_config(Architecture::rnn, 5, {4, 4}, 0)), ConfigError);
  CHECK_THROWS_AS(build_layout(make_config(Architecture::rnn, 0, {4}, 0)), ConfigError);
}

TEST_CASE("dense init with zero std gives an all-zero vector") {
  Rng rng(1);
  const ParameterSet p =
      init_params(make_config(Architecture::lstm, 6, {5}, 0), InitScheme::dense(0.0), rng);
  CHECK(p.theta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("same seed gives bit-identical initialization") {
  const ModelConfig config = make_config(Architecture::stacked_mrnn, 6, {5, 4}, 5);
  Rng a(123, 9), b(123, 9);
  const ParameterSet pa = init_params(config, InitScheme::sparse_recurrent(), a);
  const ParameterSet pb = init_params(config, InitScheme::sparse_recurrent(), b);
  CHECK((pa.theta.array() == pb.theta.array()).all());
}

TEST_CASE("sparse init zeroes W_hh entries at the configured rate") {
  const ModelConfig config = make_config(Architecture::rnn, 10, {400}, 0);
  Rng rng(5);
  const ParameterSet p = init_params(config, InitScheme::sparse_recurrent(0.9, 0.1), rng);
  const Matrix w_hh = p.layout.view(p.theta, "W_hh");
  const long nonzero = (w_hh.array() != 0.0).count();
  // 99.9% binomial interval for 160000 draws at p = 0.1
  CHECK(nonzero >= 15606);
  CHECK(nonzero <= 16394);
  // every other matrix stays dense
  const Matrix w_hi = p.layout.view(p.theta, "W_hi");
  CHECK((w_hi.array() != 0.0).all());
  const Matrix b_h = p.layout.view(p.theta, "B_h");
  CHECK(b_h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("add_scaled semantics") {
  const ModelConfig config = make_config(Architecture::rnn, 4, {3}, 0);
  Rng rng(2);
  const ParameterSet p = init_params(config, InitScheme::dense(0.5), rng);
  Vector d(p.theta.size());
  for (Index i = 0; i < d.size(); ++i) d[i] = rng.normal();

  CHECK((add_scaled(p, d, 0.0).theta.array() == p.theta.array()).all());
  CHECK(add_scaled(p, Vector(-p.theta), 1.0).theta.cwiseAbs().maxCoeff() == 0.0);

  const ParameterSet two_half = add_scaled(add_scaled(p, d, 0.5), d, 0.5);
  const ParameterSet one = add_scaled(p, d, 1.0);
  CHECK((two_half.theta - one.theta).cwiseAbs().maxCoeff() < 1e-15);

  Vector wrong(3);
  CHECK_THROWS_AS(add_scaled(p, wrong, 1.0), DimensionError);
}
