// SPDX-License-Identifier: Apache-2.0
#include "hfseq/oracle.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace hfseq::verify {

double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

OracleReport compare(const std::string& quantity, const Vector& actual, const Vector& expected,
                     double tolerance) {
  if (actual.size() != expected.size())
    throw DimensionError("oracle compare: size mismatch for " + quantity);
  OracleReport rep;
  rep.quantity = quantity;
  rep.tolerance = tolerance;
  double sum = 0.0;
  for (Index i = 0; i < actual.size(); ++i) {
    const double e = relative_error(actual[i], expected[i]);
    sum += e;
    if (e > rep.max_rel_error) {
      rep.max_rel_error = e;
      rep.worst_index = i;
    }
  }
  rep.mean_rel_error = actual.size() ? sum / actual.size() : 0.0;
  rep.pass = rep.max_rel_error < tolerance;
  return rep;
}

std::string OracleReport::text() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << "  " << quantity << ": max rel err " << max_rel_error
     << " (mean " << mean_rel_error << ", worst coord " << worst_index << ", tol " << tolerance
     << ")";
  return os.str();
}

std::string OracleReport::tsv_line() const {
  std::ostringstream os;
  os << quantity << '\t' << max_rel_error << '\t' << mean_rel_error << '\t' << worst_index
     << '\t' << tolerance << '\t' << (pass ? "pass" : "fail");
  return os.str();
}

namespace {

double loss_only(const ModelConfig& config, const ParameterSet& params, const Batch& batch) {
  ForwardOptions opts;
  opts.store_outputs = false;
  return forward(config, params, batch, opts).loss;
}

}  // namespace

Vector fd_gradient(const ModelConfig& config, const ParameterSet& params, const Batch& batch,
                   double h) {
  if (!(h > 0)) throw ConfigError("fd_gradient: h must be positive");
  const Index p = params.theta.size();
  if (p > 5000)
    throw CostGuardError("fd_gradient refuses " + std::to_string(p) +
                         " parameters (limit 5000); use a smaller probe model");
  Vector grad(p);
  ParameterSet work = params;
  for (Index i = 0; i < p; ++i) {
    const double saved = work.theta[i];
    work.theta[i] = saved + h;
    const double up = loss_only(config, work, batch);
    work.theta[i] = saved - h;
    const double down = loss_only(config, work, batch);
    work.theta[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

namespace {

// Stacks the weighted pre-softmax outputs of every active timestep into one
// column: index = ((t_active * n + j) * out + row).
Vector collect_logits(const ModelConfig& config, const ParameterSet& params, const Batch& batch) {
  ForwardOptions opts;
  opts.store_outputs = false;
  const ForwardResult f = forward(config, params, batch, opts);
  std::vector<double> vals;
  for (int t = 0; t < batch.T; ++t) {
    if (batch.weight(t) == 0.0) continue;
    const Matrix z = logits_from_cache(config, params, f.cache.layers, t);
    for (Index j = 0; j < z.cols(); ++j)
      for (Index r = 0; r < z.rows(); ++r) vals.push_back(z(r, j));
  }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

Vector collect_outputs(const ModelConfig& config, const ParameterSet& params, const Batch& batch) {
  const ForwardResult f = forward(config, params, batch);
  std::vector<double> vals;
  for (int t = 0; t < batch.T; ++t) {
    const Matrix& o = f.cache.outputs[t];
    for (Index j = 0; j < o.cols(); ++j)
      for (Index r = 0; r < o.rows(); ++r) vals.push_back(o(r, j));
  }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

Vector collect_hidden(const ModelConfig& config, const ParameterSet& params, const Batch& batch,
                      StructuralTarget target) {
  ForwardOptions opts;
  opts.store_outputs = false;
  const ForwardResult f = forward(config, params, batch, opts);
  std::vector<double> vals;
  const bool cell = target == StructuralTarget::cell_state && config.gated();
  for (int t = 0; t < batch.T; ++t)
    for (const LayerCache& lc : f.cache.layers) {
      const Matrix& hm = cell ? lc.cell[t] : lc.h[t];
      for (Index j = 0; j < hm.cols(); ++j)
        for (Index r = 0; r < hm.rows(); ++r) vals.push_back(hm(r, j));
    }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

template <class Collect>
Matrix fd_jacobian(const ParameterSet& params, Collect&& collect, double h) {
  ParameterSet work = params;
  const Index p = params.theta.size();
  Matrix jac;
  for (Index i = 0; i < p; ++i) {
    const double saved = work.theta[i];
    work.theta[i] = saved + h;
    const Vector up = collect(work);
    work.theta[i] = saved - h;
    const Vector down = collect(work);
    work.theta[i] = saved;
    if (jac.size() == 0) jac.resize(up.size(), p);
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

}  // namespace

Matrix fd_logit_jacobian(const ModelConfig& config, const ParameterSet& params,
                         const Batch& batch, double h) {
  return fd_jacobian(params,
                     [&](const ParameterSet& w) { return collect_logits(config, w, batch); }, h);
}

Matrix fd_output_jacobian(const ModelConfig& config, const ParameterSet& params,
                          const Batch& batch, double h) {
  return fd_jacobian(params,
                     [&](const ParameterSet& w) { return collect_outputs(config, w, batch); }, h);
}

Matrix fd_hidden_jacobian(const ModelConfig& config, const ParameterSet& params,
                          const Batch& batch, StructuralTarget target, double h) {
  return fd_jacobian(
      params, [&](const ParameterSet& w) { return collect_hidden(config, w, batch, target); }, h);
}

Matrix dense_gauss_newton(const ModelConfig& config, const ParameterSet& params,
                          const Batch& batch, double mu, double lambda, StructuralTarget target,
                          double h) {
  const Index p = params.theta.size();
  if (p > 500)
    throw CostGuardError("dense_gauss_newton refuses " + std::to_string(p) +
                         " parameters (limit 500)");

  const Matrix jac = fd_logit_jacobian(config, params, batch, h);
  const ForwardResult f = forward(config, params, batch);
  const int out = config.out();

  Matrix g = Matrix::Zero(p, p);
  Index row = 0;
  for (int t = 0; t < batch.T; ++t) {
    const double wt = batch.weight(t);
    if (wt == 0.0) continue;
    for (int j = 0; j < batch.n; ++j) {
      const Matrix jt = jac.middleRows(row, out);
      if (config.output_mode == OutputMode::softmax_xent) {
        const Vector o = f.cache.outputs[t].col(j);
        const Matrix h_sigma = Matrix(o.asDiagonal()) - o * o.transpose();
        g.noalias() += wt * jt.transpose() * h_sigma * jt;
      } else {
        g.noalias() += wt * jt.transpose() * jt;
      }
      row += out;
    }
  }
  g /= batch.n * batch.active_steps();

  if (mu != 0.0) {
    const Matrix jh = fd_hidden_jacobian(config, params, batch, target, h);
    g.noalias() += (mu / (batch.n * batch.T)) * (jh.transpose() * jh);
  }
  if (lambda != 0.0) g.diagonal().array() += lambda;
  return g;
}

Batch random_probe_batch(const ModelConfig& config, int T, int n, Rng& rng) {
  Batch b;
  b.T = T;
  b.n = n;
  if (config.output_mode == OutputMode::softmax_xent) {
    b.input_ids.resize(T, n);
    b.target_ids.resize(T, n);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < n; ++j) {
        b.input_ids(t, j) = static_cast<int>(rng.below(config.vocab_size));
        b.target_ids(t, j) = static_cast<int>(rng.below(config.out()));
      }
  } else {
    b.input_dense.resize(T);
    b.target_dense.resize(T);
    for (int t = 0; t < T; ++t) {
      b.input_dense[t].resize(config.vocab_size, n);
      b.target_dense[t].resize(config.out(), n);
      for (Index i = 0; i < b.input_dense[t].size(); ++i)
        b.input_dense[t].data()[i] = rng.normal();
      for (Index i = 0; i < b.target_dense[t].size(); ++i)
        b.target_dense[t].data()[i] = rng.normal();
    }
  }
  return b;
}

Vector direct_solve(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size())
    throw DimensionError("direct_solve: A must be square and match b");
  if (a.rows() > 500) throw CostGuardError("direct_solve refuses systems above 500x500");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericError("direct_solve: matrix is not symmetric positive definite");
  return llt.solve(-b);
}

}  // namespace hfseq::verify
