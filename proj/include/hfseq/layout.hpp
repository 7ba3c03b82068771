// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hfseq/model_config.hpp"
#include "hfseq/rng.hpp"
#include "hfseq/types.hpp"

namespace hfseq {

struct MatrixSpec {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Index offset = 0;
};

// Ordered map from matrix names onto slices of the flat parameter vector.
// The order is fixed per architecture and documented in the README; slices
// partition [0, total()) with no gaps or overlap, and the layout is a pure
// function of the ModelConfig.
//
// Names (stacked layers carry a ".<layer>" suffix, 1-based):
//   W_hi  input -> hidden / cell input     W_hh  hidden -> hidden
//   W_oh  hidden -> output                 B_h   hidden bias
//   W_wi/W_wh/W_wm   input (write) gate    W_fi/W_fh/W_fm  forget gate
//   W_ri/W_rh/W_rm   output (read) gate
//   W_mi  input -> factor                  W_mh  hidden -> factor
//   W_hm  factor -> hidden / cell input
//   B_c/B_w/B_f/B_r  optional extra cell/gate biases (extra_biases)
class ParamLayout {
 public:
  static ParamLayout build(const ModelConfig& config);

  Index total() const { return total_; }
  const std::vector<MatrixSpec>& specs() const { return specs_; }
  const MatrixSpec& spec(std::string_view name) const;
  bool has(std::string_view name) const;

  ConstView view(const Vector& theta, std::string_view name) const;
  MutView view(Vector& theta, std::string_view name) const;

 private:
  void add(std::string name, Index rows, Index cols);
  std::vector<MatrixSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
  Index total_ = 0;
};

struct ParameterSet {
  ParamLayout layout;
  Vector theta;
};

ParamLayout build_layout(const ModelConfig& config);

// Draws fresh parameters. Dense: every weight ~ N(0, std^2). Sparse
// recurrent: W_hh entries are zero with probability p_zero, otherwise
// N(0, std^2); all other weights are dense N(0, std^2). Biases start at 0
// under both schemes. Entries are drawn in layout order, column-major
// within each matrix, so a given (seed, stream) reproduces bit-identical
// parameters.
ParameterSet init_params(const ModelConfig& config, const InitScheme& scheme, Rng& rng);

// Returns theta + scale * direction without touching the input.
ParameterSet add_scaled(const ParameterSet& params, const Vector& direction, double scale);

}  // namespace hfseq
