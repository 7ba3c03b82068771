// SPDX-License-Identifier: Apache-2.0
#include "arch.hpp"

namespace hfseq::detail {

// H(t) = tanh(B_h + W_hi I(t) + W_hh H(t-1))
void rnn_forward(const RnnW& w, const Batch& b, int base, int len,
                 const RecurrentState& init, LayerCache& lc) {
  lc.h.resize(len);
  for (int t = 0; t < len; ++t) {
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    Matrix a = input_product(w.w_hi, b, base + t);
    a.colwise() += w.b_h.col(0);
    a.noalias() += w.w_hh * h_prev;
    lc.h[t] = a.array().tanh();
    check_finite(lc.h[t], base, t);
  }
}

BackwardCarry rnn_backward(const RnnW& w, RnnG& g, const Batch& b, int base, int len,
                           const RecurrentState& init, const LayerCache& lc,
                           const Seeds& dh, const Seeds*, BackwardCarry carry) {
  for (int t = len - 1; t >= 0; --t) {
    const Matrix& h = lc.h[t];
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    Matrix dout = dh[0][t] + carry.h[0];
    Matrix da = dout.array() * (1.0 - h.array().square());
    g.b_h.col(0) += da.rowwise().sum();
    add_input_outer(g.w_hi, da, b, base + t);
    g.w_hh.noalias() += da * h_prev.transpose();
    carry.h[0].noalias() = w.w_hh.transpose() * da;
  }
  return carry;
}

void rnn_rforward(const RnnW& w, const RnnW& rv, const Batch& b, int base, int len,
                  const RecurrentState& init, const LayerCache& lc,
                  Seeds& r_h, Seeds*) {
  const Matrix r_zero = Matrix::Zero(init.h[0].rows(), init.h[0].cols());
  for (int t = 0; t < len; ++t) {
    const Matrix& h = lc.h[t];
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    const Matrix& r_prev = t > 0 ? r_h[0][t - 1] : r_zero;
    Matrix ra = input_product(rv.w_hi, b, base + t);
    ra.colwise() += rv.b_h.col(0);
    ra.noalias() += rv.w_hh * h_prev;
    ra.noalias() += w.w_hh * r_prev;
    r_h[0][t] = ra.array() * (1.0 - h.array().square());
  }
}

}  // namespace hfseq::detail
