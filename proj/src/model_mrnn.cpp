// SPDX-License-Identifier: Apache-2.0
#include "arch.hpp"

namespace hfseq::detail {

// M(t) = (W_mi I(t)) .* (W_mh H(t-1)), stored as chi .* xi
// H(t) = tanh(B_h + W_hi I(t) + W_hm M(t))
void mrnn_forward(const MrnnW& w, const Batch& b, int base, int len,
                  const RecurrentState& init, LayerCache& lc) {
  lc.h.resize(len);
  lc.chi.resize(len);
  lc.xi.resize(len);
  for (int t = 0; t < len; ++t) {
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    lc.chi[t] = input_product(w.w_mi, b, base + t);
    lc.xi[t].noalias() = w.w_mh * h_prev;
    Matrix m = lc.chi[t].array() * lc.xi[t].array();
    Matrix a = input_product(w.w_hi, b, base + t);
    a.colwise() += w.b_h.col(0);
    a.noalias() += w.w_hm * m;
    lc.h[t] = a.array().tanh();
    check_finite(lc.h[t], base, t);
  }
}

BackwardCarry mrnn_backward(const MrnnW& w, MrnnG& g, const Batch& b, int base, int len,
                            const RecurrentState& init, const LayerCache& lc,
                            const Seeds& dh, const Seeds*, BackwardCarry carry) {
  for (int t = len - 1; t >= 0; --t) {
    const Matrix& h = lc.h[t];
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    const Matrix m = lc.chi[t].array() * lc.xi[t].array();

    Matrix dout = dh[0][t] + carry.h[0];
    Matrix da = dout.array() * (1.0 - h.array().square());
    g.b_h.col(0) += da.rowwise().sum();
    add_input_outer(g.w_hi, da, b, base + t);
    g.w_hm.noalias() += da * m.transpose();
    Matrix dm = w.w_hm.transpose() * da;
    Matrix dchi = dm.array() * lc.xi[t].array();
    Matrix dxi = dm.array() * lc.chi[t].array();
    add_input_outer(g.w_mi, dchi, b, base + t);
    g.w_mh.noalias() += dxi * h_prev.transpose();
    carry.h[0].noalias() = w.w_mh.transpose() * dxi;
  }
  return carry;
}

void mrnn_rforward(const MrnnW& w, const MrnnW& rv, const Batch& b, int base, int len,
                   const RecurrentState& init, const LayerCache& lc,
                   Seeds& r_h, Seeds*) {
  const Matrix zero = Matrix::Zero(init.h[0].rows(), init.h[0].cols());
  for (int t = 0; t < len; ++t) {
    const Matrix& h = lc.h[t];
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    const Matrix& r_prev = t > 0 ? r_h[0][t - 1] : zero;
    const Matrix m = lc.chi[t].array() * lc.xi[t].array();

    Matrix r_chi = input_product(rv.w_mi, b, base + t);
    Matrix r_xi = rv.w_mh * h_prev;
    r_xi.noalias() += w.w_mh * r_prev;
    Matrix r_m = r_chi.array() * lc.xi[t].array() + lc.chi[t].array() * r_xi.array();
    Matrix ra = input_product(rv.w_hi, b, base + t);
    ra.colwise() += rv.b_h.col(0);
    ra.noalias() += rv.w_hm * m;
    ra.noalias() += w.w_hm * r_m;
    r_h[0][t] = ra.array() * (1.0 - h.array().square());
  }
}

}  // namespace hfseq::detail
