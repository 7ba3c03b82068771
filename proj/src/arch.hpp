// SPDX-License-Identifier: Apache-2.0
//
// Internal per-architecture recurrences shared by the forward, backward and
// directional-derivative passes. Everything here works on a local window of
// `len` steps whose batch times are base..base+len-1, with the carried-in
// recurrent state supplied explicitly, so the same code serves full passes
// and checkpointed segment recomputation.
#pragma once

#include <optional>
#include <vector>

#include "hfseq/batch.hpp"
#include "hfseq/cache.hpp"
#include "hfseq/layout.hpp"

namespace hfseq::detail {

template <class View>
struct RnnWeightsT {
  View w_hi, w_hh, w_oh, b_h;
};

template <class View>
struct LstmWeightsT {
  View w_hi, w_hh, w_wi, w_wh, w_fi, w_fh, w_ri, w_rh, w_oh;
  std::optional<View> b_c, b_w, b_f, b_r;
};

template <class View>
struct MrnnWeightsT {
  View w_hi, w_mi, w_mh, w_hm, w_oh, b_h;
};

template <class View>
struct MlstmWeightsT {
  View w_hi, w_wi, w_fi, w_ri, w_hm, w_wm, w_fm, w_rm, w_mi, w_mh, w_oh;
  std::optional<View> b_c, b_w, b_f, b_r;
};

template <class View>
struct StackedLayerWeightsT {
  View w_mi, w_mh, w_hi, w_hm, w_oh, b_h;
  std::optional<View> w_hh;  // from the layer below, absent for layer 1
};
template <class View>
struct StackedWeightsT {
  std::vector<StackedLayerWeightsT<View>> layer;
};

using RnnW = RnnWeightsT<ConstView>;
using RnnG = RnnWeightsT<MutView>;
using LstmW = LstmWeightsT<ConstView>;
using LstmG = LstmWeightsT<MutView>;
using MrnnW = MrnnWeightsT<ConstView>;
using MrnnG = MrnnWeightsT<MutView>;
using MlstmW = MlstmWeightsT<ConstView>;
using MlstmG = MlstmWeightsT<MutView>;
using StackedW = StackedWeightsT<ConstView>;
using StackedG = StackedWeightsT<MutView>;

RnnW rnn_weights(const ParamLayout& l, const Vector& v);
RnnG rnn_weights(const ParamLayout& l, Vector& v);
LstmW lstm_weights(const ParamLayout& l, const Vector& v);
LstmG lstm_weights(const ParamLayout& l, Vector& v);
MrnnW mrnn_weights(const ParamLayout& l, const Vector& v);
MrnnG mrnn_weights(const ParamLayout& l, Vector& v);
MlstmW mlstm_weights(const ParamLayout& l, const Vector& v);
MlstmG mlstm_weights(const ParamLayout& l, Vector& v);
StackedW stacked_weights(const ModelConfig& c, const ParamLayout& l, const Vector& v);
StackedG stacked_weights(const ModelConfig& c, const ParamLayout& l, Vector& v);

// Adjoint of the recurrent state crossing a window boundary, per layer.
struct BackwardCarry {
  std::vector<Matrix> h;
  std::vector<Matrix> cell;
  static BackwardCarry zeros(const ModelConfig& config, int n);
};

// seeds[layer][local t], each hidden x n.
using Seeds = std::vector<std::vector<Matrix>>;

Seeds zero_seeds(const ModelConfig& config, int len, int n);

inline Eigen::ArrayXXd sigmoid(const Matrix& x) {
  return 1.0 / (1.0 + (-x.array()).exp());
}

// Throws NumericError naming the (1-based) batch timestep if the layer
// output at local step t is not finite.
void check_finite(const Matrix& h, int base, int t);

// Architecture dispatch (defined in model.cpp).
void hidden_forward(const ModelConfig& config, const ParameterSet& p, const Batch& b,
                    int base, int len, const RecurrentState& init, std::vector<LayerCache>& lc);
BackwardCarry hidden_backward(const ModelConfig& config, const ParameterSet& p, Vector& grad,
                              const Batch& b, int base, int len, const RecurrentState& init,
                              const std::vector<LayerCache>& lc, const Seeds& dh,
                              const Seeds* dcell, BackwardCarry carry);
void hidden_rforward(const ModelConfig& config, const ParameterSet& p, const Vector& v,
                     const Batch& b, int base, int len, const RecurrentState& init,
                     const std::vector<LayerCache>& lc, Seeds& r_h, Seeds* r_cell);

// Output-layer views over an arbitrary layout-shaped vector (theta, a
// direction v, or a gradient accumulator).
std::vector<ConstView> output_views(const ModelConfig& config, const ParamLayout& layout,
                                    const Vector& vec);
Matrix logits_at(const std::vector<ConstView>& w_oh, const std::vector<LayerCache>& lc, int t);
Matrix softmax_columns(const Matrix& z);
double output_loss_t(const ModelConfig& config, const Matrix& z, const Batch& b, int t,
                     Matrix* o_out);
Matrix output_delta_t(const ModelConfig& config, const Matrix& z, const Batch& b, int t);

// ---- standard RNN ----
void rnn_forward(const RnnW& w, const Batch& b, int base, int len,
                 const RecurrentState& init, LayerCache& lc);
BackwardCarry rnn_backward(const RnnW& w, RnnG& g, const Batch& b, int base, int len,
                           const RecurrentState& init, const LayerCache& lc,
                           const Seeds& dh, const Seeds* dcell, BackwardCarry carry);
void rnn_rforward(const RnnW& w, const RnnW& rv, const Batch& b, int base, int len,
                  const RecurrentState& init, const LayerCache& lc,
                  Seeds& r_h, Seeds* r_cell);

// ---- LSTM ----
void lstm_forward(const LstmW& w, const Batch& b, int base, int len,
                  const RecurrentState& init, LayerCache& lc);
BackwardCarry lstm_backward(const LstmW& w, LstmG& g, const Batch& b, int base, int len,
                            const RecurrentState& init, const LayerCache& lc,
                            const Seeds& dh, const Seeds* dcell, BackwardCarry carry);
void lstm_rforward(const LstmW& w, const LstmW& rv, const Batch& b, int base, int len,
                   const RecurrentState& init, const LayerCache& lc,
                   Seeds& r_h, Seeds* r_cell);

// ---- multiplicative RNN ----
void mrnn_forward(const MrnnW& w, const Batch& b, int base, int len,
                  const RecurrentState& init, LayerCache& lc);
BackwardCarry mrnn_backward(const MrnnW& w, MrnnG& g, const Batch& b, int base, int len,
                            const RecurrentState& init, const LayerCache& lc,
                            const Seeds& dh, const Seeds* dcell, BackwardCarry carry);
void mrnn_rforward(const MrnnW& w, const MrnnW& rv, const Batch& b, int base, int len,
                   const RecurrentState& init, const LayerCache& lc,
                   Seeds& r_h, Seeds* r_cell);

// ---- stacked multiplicative RNN ----
void stacked_forward(const StackedW& w, const Batch& b, int base, int len,
                     const RecurrentState& init, std::vector<LayerCache>& lc);
BackwardCarry stacked_backward(const StackedW& w, StackedG& g, const Batch& b, int base, int len,
                               const RecurrentState& init, const std::vector<LayerCache>& lc,
                               const Seeds& dh, const Seeds* dcell, BackwardCarry carry);
void stacked_rforward(const StackedW& w, const StackedW& rv, const Batch& b, int base, int len,
                      const RecurrentState& init, const std::vector<LayerCache>& lc,
                      Seeds& r_h, Seeds* r_cell);

// ---- multiplicative LSTM ----
void mlstm_forward(const MlstmW& w, const Batch& b, int base, int len,
                   const RecurrentState& init, LayerCache& lc);
BackwardCarry mlstm_backward(const MlstmW& w, MlstmG& g, const Batch& b, int base, int len,
                             const RecurrentState& init, const LayerCache& lc,
                             const Seeds& dh, const Seeds* dcell, BackwardCarry carry);
void mlstm_rforward(const MlstmW& w, const MlstmW& rv, const Batch& b, int base, int len,
                    const RecurrentState& init, const LayerCache& lc,
                    Seeds& r_h, Seeds* r_cell);

}  // namespace hfseq::detail
