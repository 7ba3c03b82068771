// SPDX-License-Identifier: Apache-2.0
#include "hfseq/layout.hpp"

namespace hfseq {

void ParamLayout::add(std::string name, Index rows, Index cols) {
  MatrixSpec s{std::move(name), rows, cols, total_};
  index_.emplace(s.name, specs_.size());
  total_ += rows * cols;
  specs_.push_back(std::move(s));
}

const MatrixSpec& ParamLayout::spec(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw ConfigError("layout has no matrix named '" + std::string(name) + "'");
  return specs_[it->second];
}

bool ParamLayout::has(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

ConstView ParamLayout::view(const Vector& theta, std::string_view name) const {
  if (theta.size() != total_)
    throw DimensionError("parameter vector has length " + std::to_string(theta.size()) +
                         ", layout expects " + std::to_string(total_));
  const MatrixSpec& s = spec(name);
  return ConstView(theta.data() + s.offset, s.rows, s.cols);
}

MutView ParamLayout::view(Vector& theta, std::string_view name) const {
  if (theta.size() != total_)
    throw DimensionError("parameter vector has length " + std::to_string(theta.size()) +
                         ", layout expects " + std::to_string(total_));
  const MatrixSpec& s = spec(name);
  return MutView(theta.data() + s.offset, s.rows, s.cols);
}

ParamLayout ParamLayout::build(const ModelConfig& config) {
  config.validate();
  ParamLayout layout;
  const Index v = config.vocab_size;
  const Index out = config.out();

  switch (config.architecture) {
    case Architecture::rnn: {
      const Index h = config.hidden();
      layout.add("W_hi", h, v);
      layout.add("W_hh", h, h);
      layout.add("W_oh", out, h);
      layout.add("B_h", h, 1);
      break;
    }
    case Architecture::lstm: {
      const Index h = config.hidden();
      layout.add("W_hi", h, v);
      layout.add("W_hh", h, h);
      layout.add("W_wi", h, v);
      layout.add("W_wh", h, h);
      layout.add("W_fi", h, v);
      layout.add("W_fh", h, h);
      layout.add("W_ri", h, v);
      layout.add("W_rh", h, h);
      layout.add("W_oh", out, h);
      if (config.extra_biases) {
        layout.add("B_c", h, 1);
        layout.add("B_w", h, 1);
        layout.add("B_f", h, 1);
        layout.add("B_r", h, 1);
      }
      break;
    }
    case Architecture::mrnn: {
      const Index h = config.hidden();
      const Index m = config.factor_size;
      layout.add("W_hi", h, v);
      layout.add("W_mi", m, v);
      layout.add("W_mh", m, h);
      layout.add("W_hm", h, m);
      layout.add("W_oh", out, h);
      layout.add("B_h", h, 1);
      break;
    }
    case Architecture::stacked_mrnn: {
      // Each layer's factor width equals its hidden width. W_hh.<l> maps the
      // layer below into layer l and exists only for l >= 2.
      Index below = 0;
      for (int l = 0; l < config.layers(); ++l) {
        const Index h = config.hidden_sizes[l];
        const std::string sfx = "." + std::to_string(l + 1);
        layout.add("W_mi" + sfx, h, v);
        layout.add("W_mh" + sfx, h, h);
        layout.add("W_hi" + sfx, h, v);
        layout.add("W_hm" + sfx, h, h);
        if (l > 0) layout.add("W_hh" + sfx, h, below);
        layout.add("W_oh" + sfx, out, h);
        layout.add("B_h" + sfx, h, 1);
        below = h;
      }
      break;
    }
    case Architecture::mlstm: {
      const Index h = config.hidden();
      const Index m = config.factor_size;
      layout.add("W_hi", h, v);
      layout.add("W_wi", h, v);
      layout.add("W_fi", h, v);
      layout.add("W_ri", h, v);
      layout.add("W_hm", h, m);
      layout.add("W_wm", h, m);
      layout.add("W_fm", h, m);
      layout.add("W_rm", h, m);
      layout.add("W_mi", m, v);
      layout.add("W_mh", m, h);
      layout.add("W_oh", out, h);
      if (config.extra_biases) {
        layout.add("B_c", h, 1);
        layout.add("B_w", h, 1);
        layout.add("B_f", h, 1);
        layout.add("B_r", h, 1);
      }
      break;
    }
  }
  return layout;
}

ParamLayout build_layout(const ModelConfig& config) { return ParamLayout::build(config); }

ParameterSet init_params(const ModelConfig& config, const InitScheme& scheme, Rng& rng) {
  ParameterSet p{ParamLayout::build(config), Vector()};
  p.theta = Vector::Zero(p.layout.total());
  for (const MatrixSpec& s : p.layout.specs()) {
    const bool bias = s.name[0] == 'B';
    // Sparse initialization targets the recurrent hidden-to-hidden matrix
    // only; every other weight matrix stays dense.
    const bool sparse = scheme.kind == InitScheme::Kind::sparse_recurrent && s.name == "W_hh";
    double* data = p.theta.data() + s.offset;
    const Index count = s.rows * s.cols;
    for (Index i = 0; i < count; ++i) {
      if (bias) {
        data[i] = 0.0;
      } else if (sparse) {
        const double u = rng.uniform();
        data[i] = u < scheme.p_zero ? 0.0 : rng.normal() * scheme.std;
      } else {
        data[i] = rng.normal() * scheme.std;
      }
    }
  }
  return p;
}

ParameterSet add_scaled(const ParameterSet& params, const Vector& direction, double scale) {
  if (direction.size() != params.theta.size())
    throw DimensionError("direction has length " + std::to_string(direction.size()) +
                         ", theta has length " + std::to_string(params.theta.size()));
  ParameterSet out{params.layout, params.theta + scale * direction};
  return out;
}

}  // namespace hfseq
