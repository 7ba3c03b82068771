// SPDX-License-Identifier: Apache-2.0
#include "arch.hpp"

namespace hfseq::detail {

// Every layer is a multiplicative RNN with direct input connections; layer
// l > 1 additionally reads H_{l-1}(t) through W_hh.l at the same timestep.
//   M_l(t) = (W_mi.l I(t)) .* (W_mh.l H_l(t-1))
//   H_l(t) = tanh(B_h.l + W_hi.l I(t) + W_hm.l M_l(t) + W_hh.l H_{l-1}(t))
void stacked_forward(const StackedW& w, const Batch& b, int base, int len,
                     const RecurrentState& init, std::vector<LayerCache>& lc) {
  const int layers = static_cast<int>(w.layer.size());
  for (int l = 0; l < layers; ++l) {
    lc[l].h.resize(len);
    lc[l].chi.resize(len);
    lc[l].xi.resize(len);
  }
  for (int t = 0; t < len; ++t) {
    for (int l = 0; l < layers; ++l) {
      const auto& wl = w.layer[l];
      const Matrix& h_prev = t > 0 ? lc[l].h[t - 1] : init.h[l];
      lc[l].chi[t] = input_product(wl.w_mi, b, base + t);
      lc[l].xi[t].noalias() = wl.w_mh * h_prev;
      Matrix m = lc[l].chi[t].array() * lc[l].xi[t].array();
      Matrix a = input_product(wl.w_hi, b, base + t);
      a.colwise() += wl.b_h.col(0);
      a.noalias() += wl.w_hm * m;
      if (wl.w_hh) a.noalias() += *wl.w_hh * lc[l - 1].h[t];
      lc[l].h[t] = a.array().tanh();
      check_finite(lc[l].h[t], base, t);
    }
  }
}

BackwardCarry stacked_backward(const StackedW& w, StackedG& g, const Batch& b, int base, int len,
                               const RecurrentState& init, const std::vector<LayerCache>& lc,
                               const Seeds& dh, const Seeds*, BackwardCarry carry) {
  const int layers = static_cast<int>(w.layer.size());
  std::vector<Matrix> da(layers);
  for (int t = len - 1; t >= 0; --t) {
    // Layers processed top-down: da of layer l+1 at the same timestep feeds
    // layer l through W_hh.(l+1).
    for (int l = layers - 1; l >= 0; --l) {
      const auto& wl = w.layer[l];
      auto& gl = g.layer[l];
      const Matrix& h = lc[l].h[t];
      const Matrix& h_prev = t > 0 ? lc[l].h[t - 1] : init.h[l];
      const Matrix m = lc[l].chi[t].array() * lc[l].xi[t].array();

      Matrix dout = dh[l][t] + carry.h[l];
      if (l + 1 < layers) dout.noalias() += w.layer[l + 1].w_hh->transpose() * da[l + 1];
      da[l] = dout.array() * (1.0 - h.array().square());

      gl.b_h.col(0) += da[l].rowwise().sum();
      add_input_outer(gl.w_hi, da[l], b, base + t);
      gl.w_hm.noalias() += da[l] * m.transpose();
      if (gl.w_hh) gl.w_hh->noalias() += da[l] * lc[l - 1].h[t].transpose();
      Matrix dm = wl.w_hm.transpose() * da[l];
      Matrix dchi = dm.array() * lc[l].xi[t].array();
      Matrix dxi = dm.array() * lc[l].chi[t].array();
      add_input_outer(gl.w_mi, dchi, b, base + t);
      gl.w_mh.noalias() += dxi * h_prev.transpose();
      carry.h[l].noalias() = wl.w_mh.transpose() * dxi;
    }
  }
  return carry;
}

void stacked_rforward(const StackedW& w, const StackedW& rv, const Batch& b, int base, int len,
                      const RecurrentState& init, const std::vector<LayerCache>& lc,
                      Seeds& r_h, Seeds*) {
  const int layers = static_cast<int>(w.layer.size());
  for (int t = 0; t < len; ++t) {
    for (int l = 0; l < layers; ++l) {
      const auto& wl = w.layer[l];
      const auto& rl = rv.layer[l];
      const Matrix& h = lc[l].h[t];
      const Matrix& h_prev = t > 0 ? lc[l].h[t - 1] : init.h[l];
      const Matrix m = lc[l].chi[t].array() * lc[l].xi[t].array();

      Matrix r_chi = input_product(rl.w_mi, b, base + t);
      Matrix r_xi = rl.w_mh * h_prev;
      if (t > 0) r_xi.noalias() += wl.w_mh * r_h[l][t - 1];
      Matrix r_m = r_chi.array() * lc[l].xi[t].array() + lc[l].chi[t].array() * r_xi.array();

      Matrix ra = input_product(rl.w_hi, b, base + t);
      ra.colwise() += rl.b_h.col(0);
      ra.noalias() += rl.w_hm * m;
      ra.noalias() += wl.w_hm * r_m;
      if (wl.w_hh) {
        ra.noalias() += *rl.w_hh * lc[l - 1].h[t];
        ra.noalias() += *wl.w_hh * r_h[l - 1][t];
      }
      r_h[l][t] = ra.array() * (1.0 - h.array().square());
    }
  }
}

}  // namespace hfseq::detail
