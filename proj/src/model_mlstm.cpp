// SPDX-License-Identifier: Apache-2.0
#include "arch.hpp"

namespace hfseq::detail {

// M(t) = (W_mh H_out(t-1)) .* (W_mi I(t)); the cell input and every gate read
// I(t) and M(t). The cell itself behaves exactly like the LSTM cell.
void mlstm_forward(const MlstmW& w, const Batch& b, int base, int len,
                   const RecurrentState& init, LayerCache& lc) {
  lc.h.resize(len);
  lc.cell.resize(len);
  lc.cell_in.resize(len);
  lc.gate_w.resize(len);
  lc.gate_f.resize(len);
  lc.gate_r.resize(len);
  lc.chi.resize(len);
  lc.xi.resize(len);
  for (int t = 0; t < len; ++t) {
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    const Matrix& c_prev = t > 0 ? lc.cell[t - 1] : init.cell[0];
    const int bt = base + t;

    lc.chi[t] = input_product(w.w_mi, b, bt);
    lc.xi[t].noalias() = w.w_mh * h_prev;
    Matrix m = lc.chi[t].array() * lc.xi[t].array();

    Matrix c_in = input_product(w.w_hi, b, bt);
    Matrix aw = input_product(w.w_wi, b, bt);
    Matrix af = input_product(w.w_fi, b, bt);
    Matrix ar = input_product(w.w_ri, b, bt);
    c_in.noalias() += w.w_hm * m;
    aw.noalias() += w.w_wm * m;
    af.noalias() += w.w_fm * m;
    ar.noalias() += w.w_rm * m;
    if (w.b_c) {
      c_in.colwise() += w.b_c->col(0);
      aw.colwise() += w.b_w->col(0);
      af.colwise() += w.b_f->col(0);
      ar.colwise() += w.b_r->col(0);
    }

    lc.cell_in[t] = std::move(c_in);
    lc.gate_w[t] = sigmoid(aw);
    lc.gate_f[t] = sigmoid(af);
    lc.gate_r[t] = sigmoid(ar);
    lc.cell[t] = lc.gate_f[t].array() * c_prev.array() +
                 lc.gate_w[t].array() * lc.cell_in[t].array();
    lc.h[t] = (lc.cell[t].array() * lc.gate_r[t].array()).tanh();
    check_finite(lc.h[t], base, t);
  }
}

BackwardCarry mlstm_backward(const MlstmW& w, MlstmG& g, const Batch& b, int base, int len,
                             const RecurrentState& init, const LayerCache& lc,
                             const Seeds& dh, const Seeds* dcell, BackwardCarry carry) {
  for (int t = len - 1; t >= 0; --t) {
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    const Matrix& c_prev = t > 0 ? lc.cell[t - 1] : init.cell[0];
    const int bt = base + t;
    const auto gw = lc.gate_w[t].array();
    const auto gf = lc.gate_f[t].array();
    const auto gr = lc.gate_r[t].array();
    const Matrix m = lc.chi[t].array() * lc.xi[t].array();

    Matrix dout = dh[0][t] + carry.h[0];
    Matrix dzeta = dout.array() * (1.0 - lc.h[t].array().square());
    Matrix dgr_out = dzeta.array() * lc.cell[t].array();
    Matrix dc = dzeta.array() * gr;
    dc += carry.cell[0];
    if (dcell) dc += (*dcell)[0][t];
    Matrix dgf_out = dc.array() * c_prev.array();
    Matrix dgw_out = dc.array() * lc.cell_in[t].array();
    Matrix dc_in = dc.array() * gw;
    Matrix dgw_in = dgw_out.array() * gw * (1.0 - gw);
    Matrix dgf_in = dgf_out.array() * gf * (1.0 - gf);
    Matrix dgr_in = dgr_out.array() * gr * (1.0 - gr);

    Matrix dm = w.w_hm.transpose() * dc_in;
    dm.noalias() += w.w_wm.transpose() * dgw_in;
    dm.noalias() += w.w_fm.transpose() * dgf_in;
    dm.noalias() += w.w_rm.transpose() * dgr_in;
    Matrix dchi = dm.array() * lc.xi[t].array();
    Matrix dxi = dm.array() * lc.chi[t].array();

    add_input_outer(g.w_hi, dc_in, b, bt);
    add_input_outer(g.w_wi, dgw_in, b, bt);
    add_input_outer(g.w_fi, dgf_in, b, bt);
    add_input_outer(g.w_ri, dgr_in, b, bt);
    g.w_hm.noalias() += dc_in * m.transpose();
    g.w_wm.noalias() += dgw_in * m.transpose();
    g.w_fm.noalias() += dgf_in * m.transpose();
    g.w_rm.noalias() += dgr_in * m.transpose();
    add_input_outer(g.w_mi, dchi, b, bt);
    g.w_mh.noalias() += dxi * h_prev.transpose();
    if (g.b_c) {
      g.b_c->col(0) += dc_in.rowwise().sum();
      g.b_w->col(0) += dgw_in.rowwise().sum();
      g.b_f->col(0) += dgf_in.rowwise().sum();
      g.b_r->col(0) += dgr_in.rowwise().sum();
    }

    carry.h[0].noalias() = w.w_mh.transpose() * dxi;
    carry.cell[0] = dc.array() * gf;
  }
  return carry;
}

void mlstm_rforward(const MlstmW& w, const MlstmW& rv, const Batch& b, int base, int len,
                    const RecurrentState& init, const LayerCache& lc,
                    Seeds& r_h, Seeds* r_cell) {
  const Matrix zero = Matrix::Zero(init.h[0].rows(), init.h[0].cols());
  Matrix r_c_prev = zero;
  for (int t = 0; t < len; ++t) {
    const Matrix& h_prev = t > 0 ? lc.h[t - 1] : init.h[0];
    const Matrix& c_prev = t > 0 ? lc.cell[t - 1] : init.cell[0];
    const Matrix& r_h_prev = t > 0 ? r_h[0][t - 1] : zero;
    const int bt = base + t;
    const auto gw = lc.gate_w[t].array();
    const auto gf = lc.gate_f[t].array();
    const auto gr = lc.gate_r[t].array();
    const Matrix m = lc.chi[t].array() * lc.xi[t].array();

    Matrix r_chi = input_product(rv.w_mi, b, bt);
    Matrix r_xi = rv.w_mh * h_prev;
    r_xi.noalias() += w.w_mh * r_h_prev;
    Matrix r_m = r_chi.array() * lc.xi[t].array() + lc.chi[t].array() * r_xi.array();

    Matrix r_cin = input_product(rv.w_hi, b, bt);
    Matrix r_awin = input_product(rv.w_wi, b, bt);
    Matrix r_afin = input_product(rv.w_fi, b, bt);
    Matrix r_arin = input_product(rv.w_ri, b, bt);
    r_cin.noalias() += rv.w_hm * m;
    r_awin.noalias() += rv.w_wm * m;
    r_afin.noalias() += rv.w_fm * m;
    r_arin.noalias() += rv.w_rm * m;
    r_cin.noalias() += w.w_hm * r_m;
    r_awin.noalias() += w.w_wm * r_m;
    r_afin.noalias() += w.w_fm * r_m;
    r_arin.noalias() += w.w_rm * r_m;
    if (rv.b_c) {
      r_cin.colwise() += rv.b_c->col(0);
      r_awin.colwise() += rv.b_w->col(0);
      r_afin.colwise() += rv.b_f->col(0);
      r_arin.colwise() += rv.b_r->col(0);
    }

    Matrix r_gw = r_awin.array() * gw * (1.0 - gw);
    Matrix r_gf = r_afin.array() * gf * (1.0 - gf);
    Matrix r_gr = r_arin.array() * gr * (1.0 - gr);
    Matrix r_c = lc.cell_in[t].array() * r_gw.array() + r_cin.array() * gw +
                 r_gf.array() * c_prev.array() + gf * r_c_prev.array();
    Matrix r_zeta = r_c.array() * gr + lc.cell[t].array() * r_gr.array();
    r_h[0][t] = r_zeta.array() * (1.0 - lc.h[t].array().square());
    if (r_cell) (*r_cell)[0][t] = r_c;
    r_c_prev = std::move(r_c);
  }
}

}  // namespace hfseq::detail
