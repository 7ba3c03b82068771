// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "hfseq/curvature.hpp"
#include "hfseq/oracle.hpp"

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

std::vector<ModelConfig> all_architectures(OutputMode mode = OutputMode::softmax_xent) {
  return {
      make_config(Architecture::rnn, 4, {5}, 0, mode),
      make_config(Architecture::lstm, 4, {5}, 0, mode),
      make_config(Architecture::mrnn, 4, {5}, 5, mode),
      make_config(Architecture::stacked_mrnn, 4, {4, 3}, 4, mode),
      make_config(Architecture::mlstm, 4, {4}, 4, mode),
  };
}

Vector random_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

struct Instance {
  ModelConfig config;
  ParameterSet params;
  Batch batch;
};

Instance make_instance(const ModelConfig& config, int T = 6, int n = 2, int seed = 71) {
  Rng rng(seed);
  Instance inst{config, init_params(config, InitScheme::dense(0.4), rng),
                verify::random_probe_batch(config, T, n, rng)};
  return inst;
}

}  // namespace

TEST_CASE("softmax output Hessian product against the dense matrix") {
  Rng rng(73);
  for (int rep = 0; rep < 10; ++rep) {
    Vector z = random_vector(6, rng);
    Vector o = (z.array() - z.maxCoeff()).exp();
    o /= o.sum();
    const Vector r = random_vector(6, rng);
    const Matrix dense = Matrix(o.asDiagonal()) - o * o.transpose();
    const Vector got = apply_output_hessian(OutputMode::softmax_xent, o, r);
    CHECK((got - dense * r).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("softmax output Hessian annihilates constant vectors") {
  Rng rng(74);
  Vector o = random_vector(5, rng).cwiseAbs();
  o /= o.sum();
  const Vector ones = Vector::Constant(5, 3.7);
  CHECK(apply_output_hessian(OutputMode::softmax_xent, o, ones).cwiseAbs().maxCoeff() < 1e-15);
  // degenerate one-hot distribution kills everything
  Vector point = Vector::Zero(5);
  point[0] = 1.0;
  const Vector r = random_vector(5, rng);
  CHECK(apply_output_hessian(OutputMode::softmax_xent, point, r).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mse output Hessian is the identity") {
  Rng rng(75);
  const Vector o = random_vector(4, rng);
  const Vector r = random_vector(4, rng);
  CHECK((apply_output_hessian(OutputMode::linear_mse, o, r) - r).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("r_forward: zero direction, homogeneity, and finite differences") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    const Instance inst = make_instance(config);
    const CurvatureContext ctx =
        CurvatureContext::build(config, inst.params, inst.batch, 0.0, 0.0);
    Rng rng(79);
    const Index p = inst.params.theta.size();

    const auto zero = r_forward(ctx, Vector::Zero(p));
    for (const Matrix& m : zero) CHECK(m.cwiseAbs().maxCoeff() == 0.0);

    const Vector v = random_vector(p, rng);
    const auto rv = r_forward(ctx, v);
    const auto rv2 = r_forward(ctx, Vector(2.0 * v));
    for (int t = 0; t < inst.batch.T; ++t)
      CHECK((rv2[t] - 2.0 * rv[t]).cwiseAbs().maxCoeff() < 1e-12);

    // columns of the output Jacobian via central differences
    const Matrix jac = verify::fd_output_jacobian(config, inst.params, inst.batch, 1e-5);
    for (int probe = 0; probe < 3; ++probe) {
      const Index i = rng.below(p);
      Vector e = Vector::Zero(p);
      e[i] = 1.0;
      const auto re = r_forward(ctx, e);
      Index row = 0;
      double worst = 0.0;
      for (int t = 0; t < inst.batch.T; ++t)
        for (int j = 0; j < inst.batch.n; ++j)
          for (int r = 0; r < config.out(); ++r)
            worst = std::max(worst, std::abs(re[t](r, j) - jac(row++, i)));
      CHECK(worst < 1e-6);
    }
  }
}

TEST_CASE("tikhonov term adds exactly lambda v") {
  const Instance inst = make_instance(make_config(Architecture::mlstm, 4, {4}, 4));
  Rng rng(83);
  const Vector v = random_vector(inst.params.theta.size(), rng);
  const CurvatureContext c0 =
      CurvatureContext::build(inst.config, inst.params, inst.batch, 0.2, 0.0);
  const CurvatureContext c3 =
      CurvatureContext::build(inst.config, inst.params, inst.batch, 0.2, 3.0);
  const Vector d = gauss_newton_product(c3, v) - gauss_newton_product(c0, v) - 3.0 * v;
  CHECK(d.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("gauss-newton product is linear, symmetric and positive semidefinite") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    const Instance inst = make_instance(config);
    const CurvatureContext ctx =
        CurvatureContext::build(config, inst.params, inst.batch, 0.0, 0.0);
    Rng rng(89);
    const Index p = inst.params.theta.size();
    const Vector u = random_vector(p, rng);
    const Vector w = random_vector(p, rng);

    const Vector gu = gauss_newton_product(ctx, u);
    const Vector gw = gauss_newton_product(ctx, w);
    const Vector gmix = gauss_newton_product(ctx, Vector(1.3 * u - 0.7 * w));
    CHECK((gmix - 1.3 * gu + 0.7 * gw).norm() <= 1e-10 * (u.norm() + w.norm()));

    CHECK(std::abs(u.dot(gw) - w.dot(gu)) <
          1e-10 * std::max(1.0, std::abs(u.dot(gw))));
    CHECK(u.dot(gu) >= -1e-10);
    CHECK(w.dot(gw) >= -1e-10);
  }
}

TEST_CASE("gauss-newton product matches the dense oracle on every architecture") {
  for (OutputMode mode : {OutputMode::softmax_xent, OutputMode::linear_mse}) {
    for (const ModelConfig& config : all_architectures(mode)) {
      CAPTURE(to_string(config.architecture));
      CAPTURE(to_string(mode));
      const Instance inst = make_instance(config);
      REQUIRE(inst.params.theta.size() <= 300);
      const CurvatureContext ctx =
          CurvatureContext::build(config, inst.params, inst.batch, 0.0, 0.0);
      const Matrix dense = verify::dense_gauss_newton(config, inst.params, inst.batch, 0.0, 0.0);
      Rng rng(97);
      double num = 0.0, den = 0.0;
      for (int probe = 0; probe < 10; ++probe) {
        const Vector v = random_vector(inst.params.theta.size(), rng);
        const Vector got = gauss_newton_product(ctx, v);
        const Vector want = dense * v;
        num += (got - want).squaredNorm();
        den += want.squaredNorm();
      }
      CHECK(std::sqrt(num / den) < 1e-4);
    }
  }
}

TEST_CASE("structural curvature matches the dense hidden-state oracle") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    const Instance inst = make_instance(config);
    const CurvatureContext ctx =
        CurvatureContext::build(config, inst.params, inst.batch, 1.0, 0.0);
    const Matrix jh = verify::fd_hidden_jacobian(config, inst.params, inst.batch);
    const Matrix dense =
        jh.transpose() * jh / (inst.batch.n * static_cast<double>(inst.batch.T));
    Rng rng(101);
    double num = 0.0, den = 0.0;
    for (int probe = 0; probe < 10; ++probe) {
      const Vector v = random_vector(inst.params.theta.size(), rng);
      const Vector got = structural_curvature_product(ctx, v);
      const Vector want = dense * v;
      num += (got - want).squaredNorm();
      den += want.squaredNorm();
    }
    CHECK(std::sqrt(num / den) < 1e-4);
  }
}

TEST_CASE("structural curvature with the cell-state target matches its oracle") {
  const ModelConfig config = make_config(Architecture::lstm, 4, {5}, 0);
  const Instance inst = make_instance(config);
  const CurvatureContext ctx = CurvatureContext::build(
      config, inst.params, inst.batch, 1.0, 0.0, 256, 1, StructuralTarget::cell_state);
  const Matrix jh =
      verify::fd_hidden_jacobian(config, inst.params, inst.batch, StructuralTarget::cell_state);
  const Matrix dense = jh.transpose() * jh / (inst.batch.n * static_cast<double>(inst.batch.T));
  Rng rng(103);
  double num = 0.0, den = 0.0;
  for (int probe = 0; probe < 6; ++probe) {
    const Vector v = random_vector(inst.params.theta.size(), rng);
    num += (structural_curvature_product(ctx, v) - dense * v).squaredNorm();
    den += (dense * v).squaredNorm();
  }
  CHECK(std::sqrt(num / den) < 1e-4);
}

TEST_CASE("structural curvature is symmetric") {
  const Instance inst = make_instance(make_config(Architecture::mlstm, 4, {4}, 4));
  const CurvatureContext ctx =
      CurvatureContext::build(inst.config, inst.params, inst.batch, 1.0, 0.0);
  Rng rng(107);
  const Vector u = random_vector(inst.params.theta.size(), rng);
  const Vector v = random_vector(inst.params.theta.size(), rng);
  const double uv = u.dot(structural_curvature_product(ctx, v));
  const double vu = v.dot(structural_curvature_product(ctx, u));
  CHECK(std::abs(uv - vu) < 1e-10 * std::max(1.0, std::abs(uv)));
}

TEST_CASE("damped product decomposes into loss, structural and tikhonov parts") {
  for (const ModelConfig& config : all_architectures()) {
    CAPTURE(to_string(config.architecture));
    const Instance inst = make_instance(config);
    Rng rng(109);
    const Vector v = random_vector(inst.params.theta.size(), rng);
    for (double mu : {0.01, 0.3, 1.0}) {
      for (double lambda : {0.0, 10.0}) {
        const CurvatureContext damped =
            CurvatureContext::build(config, inst.params, inst.batch, mu, lambda);
        const CurvatureContext plain =
            CurvatureContext::build(config, inst.params, inst.batch, 0.0, 0.0);
        const Vector lhs = gauss_newton_product(damped, v);
        const Vector rhs = gauss_newton_product(plain, v) +
                           mu * structural_curvature_product(plain, v) + lambda * v;
        const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() / scale < 1e-12);
      }
    }
  }
}

TEST_CASE("dense oracle is symmetric, PSD, and reduces to lambda I at zero sensitivity") {
  const ModelConfig config = make_config(Architecture::rnn, 4, {5}, 0);
  const Instance inst = make_instance(config);
  const Matrix g = verify::dense_gauss_newton(config, inst.params, inst.batch, 0.3, 0.0);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);

  // zero parameters kill the logit Jacobian's W_hi/W_hh/B_h blocks and the
  // whole hidden Jacobian; with mu = 0 only lambda remains on the diagonal
  // of those blocks.
  ParameterSet zero{build_layout(config), Vector::Zero(build_layout(config).total())};
  const Matrix gz = verify::dense_gauss_newton(config, zero, inst.batch, 0.0, 2.5);
  const Index upto = zero.layout.spec("W_oh").offset;
  for (Index i = 0; i < upto; ++i)
    for (Index j = 0; j < gz.cols(); ++j)
      CHECK(std::abs(gz(i, j) - (i == j ? 2.5 : 0.0)) < 1e-9);
}

TEST_CASE("curvature products are independent of chunking and worker count") {
  const ModelConfig config = make_config(Architecture::mlstm, 4, {4}, 4);
  const Instance inst = make_instance(config, 6, 7);
  Rng rng(113);
  const Vector v = random_vector(inst.params.theta.size(), rng);
  const CurvatureContext one =
      CurvatureContext::build(config, inst.params, inst.batch, 0.5, 0.1, 3, 1);
  const CurvatureContext many =
      CurvatureContext::build(config, inst.params, inst.batch, 0.5, 0.1, 3, 4);
  const Vector a = gauss_newton_product(one, v);
  const Vector b = gauss_newton_product(many, v);
  CHECK((a.array() == b.array()).all());
}
