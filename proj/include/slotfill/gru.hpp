#ifndef SLOTFILL_GRU_HPP
#define SLOTFILL_GRU_HPP

#include <cmath>
#include <utility>

#include "slotfill/types.hpp"

namespace slotfill {

// Single-direction GRU. Inputs are row vectors, so input weights are
// d_in x h and recurrent weights h x h. The candidate state applies the
// reset gate to the previous state before the recurrent multiply, and the
// new state interpolates as (1-z) * h_prev + z * candidate.
template <typename Scalar>
struct GruParams {
  Mat<Scalar> in_update, in_reset, in_cand;   // d_in x h
  Mat<Scalar> rec_update, rec_reset, rec_cand;  // h x h
  Vec<Scalar> b_update, b_reset, b_cand;      // h

  Index input_dim() const { return in_update.rows(); }
  Index hidden_dim() const { return in_update.cols(); }

  void setZero(Index d_in, Index h) {
    in_update.setZero(d_in, h);
    in_reset.setZero(d_in, h);
    in_cand.setZero(d_in, h);
    rec_update.setZero(h, h);
    rec_reset.setZero(h, h);
    rec_cand.setZero(h, h);
    b_update.setZero(h);
    b_reset.setZero(h);
    b_cand.setZero(h);
  }
};

// Forward activations cached for backward-through-time.
template <typename Scalar>
struct GruTape {
  Mat<Scalar> inputs;                    // k x d_in
  Mat<Scalar> update, reset, cand, state;  // k x h each
  Vec<Scalar> drop_mask;                 // h; ones when dropout is off
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// Runs the recurrence over k timesteps from a zero initial state and returns
// the k x h state matrix. An optional variational dropout mask (already
// scaled by 1/keep) multiplies the previous state wherever it feeds the
// gates and the candidate; the carried state itself stays unmasked.
template <typename Scalar>
Mat<Scalar> gru_forward(const Mat<Scalar>& inputs, const GruParams<Scalar>& p,
                        const Vec<Scalar>* drop_mask = nullptr,
                        GruTape<Scalar>* tape = nullptr) {
  const Index k = inputs.rows(), h = p.hidden_dim();
  require(inputs.cols() == p.input_dim(), "GRU input dimension mismatch");
  Mat<Scalar> update(k, h), reset(k, h), cand(k, h), state(k, h);
  Vec<Scalar> mask = drop_mask ? *drop_mask : Vec<Scalar>::Ones(h);
  require(mask.size() == h, "dropout mask size mismatch");

  Vec<Scalar> h_prev = Vec<Scalar>::Zero(h);
  for (Index t = 0; t < k; ++t) {
    Vec<Scalar> h_drop = h_prev.cwiseProduct(mask);
    Vec<Scalar> z = (p.in_update.transpose() * inputs.row(t).transpose() +
                     p.rec_update.transpose() * h_drop + p.b_update)
                        .unaryExpr([](Scalar v) { return sigmoid(v); });
    Vec<Scalar> r = (p.in_reset.transpose() * inputs.row(t).transpose() +
                     p.rec_reset.transpose() * h_drop + p.b_reset)
                        .unaryExpr([](Scalar v) { return sigmoid(v); });
    Vec<Scalar> c = (p.in_cand.transpose() * inputs.row(t).transpose() +
                     p.rec_cand.transpose() * r.cwiseProduct(h_drop) + p.b_cand)
                        .array()
                        .tanh()
                        .matrix();
    Vec<Scalar> h_new =
        (Vec<Scalar>::Ones(h) - z).cwiseProduct(h_prev) + z.cwiseProduct(c);
    update.row(t) = z.transpose();
    reset.row(t) = r.transpose();
    cand.row(t) = c.transpose();
    state.row(t) = h_new.transpose();
    h_prev = h_new;
  }
  if (tape) {
    tape->inputs = inputs;
    tape->update = update;
    tape->reset = reset;
    tape->cand = cand;
    tape->state = std::move(state);
    tape->drop_mask = mask;
    return tape->state;
  }
  return state;
}

// Backward through time. d_state is the upstream gradient on every output
// state (k x h). Accumulates into `grads` and `d_inputs`; both must be
// pre-sized (zeros for a fresh pass).
template <typename Scalar>
void gru_backward(const GruParams<Scalar>& p, const GruTape<Scalar>& tape,
                  const Mat<Scalar>& d_state, GruParams<Scalar>& grads,
                  Mat<Scalar>& d_inputs) {
  const Index k = tape.inputs.rows(), h = p.hidden_dim();
  const Vec<Scalar>& mask = tape.drop_mask;
  Vec<Scalar> d_h_next = Vec<Scalar>::Zero(h);  // carried gradient on h_t

  for (Index t = k - 1; t >= 0; --t) {
    Vec<Scalar> d_h = d_state.row(t).transpose() + d_h_next;
    Vec<Scalar> z = tape.update.row(t).transpose();
    Vec<Scalar> r = tape.reset.row(t).transpose();
    Vec<Scalar> c = tape.cand.row(t).transpose();
    Vec<Scalar> h_prev = t == 0 ? Vec<Scalar>::Zero(h)
                                : Vec<Scalar>(tape.state.row(t - 1).transpose());
    Vec<Scalar> h_drop = h_prev.cwiseProduct(mask);

    Vec<Scalar> d_c = d_h.cwiseProduct(z);
    Vec<Scalar> d_z = d_h.cwiseProduct(c - h_prev);
    Vec<Scalar> d_h_prev = d_h.cwiseProduct(Vec<Scalar>::Ones(h) - z);

    Vec<Scalar> d_pre_c = d_c.cwiseProduct(
        (Vec<Scalar>::Ones(h) - c.cwiseProduct(c)));
    Vec<Scalar> d_rh = p.rec_cand * d_pre_c;  // gradient on r .* h_drop
    Vec<Scalar> d_r = d_rh.cwiseProduct(h_drop);
    Vec<Scalar> d_h_drop = d_rh.cwiseProduct(r);

    Vec<Scalar> d_pre_z = d_z.cwiseProduct(z.cwiseProduct(Vec<Scalar>::Ones(h) - z));
    Vec<Scalar> d_pre_r = d_r.cwiseProduct(r.cwiseProduct(Vec<Scalar>::Ones(h) - r));
    d_h_drop += p.rec_update * d_pre_z + p.rec_reset * d_pre_r;

    const auto x_t = tape.inputs.row(t);
    grads.in_update.noalias() += x_t.transpose() * d_pre_z.transpose();
    grads.in_reset.noalias() += x_t.transpose() * d_pre_r.transpose();
    grads.in_cand.noalias() += x_t.transpose() * d_pre_c.transpose();
    grads.rec_update.noalias() += h_drop * d_pre_z.transpose();
    grads.rec_reset.noalias() += h_drop * d_pre_r.transpose();
    grads.rec_cand.noalias() += r.cwiseProduct(h_drop) * d_pre_c.transpose();
    grads.b_update += d_pre_z;
    grads.b_reset += d_pre_r;
    grads.b_cand += d_pre_c;

    d_inputs.row(t) += (p.in_update * d_pre_z + p.in_reset * d_pre_r +
                        p.in_cand * d_pre_c)
                           .transpose();
    d_h_next = d_h_prev + d_h_drop.cwiseProduct(mask);
  }
}

// Bidirectional wrapper: the reverse direction runs the same recurrence on
// the reversed sequence and its outputs are flipped back, so position i of
// the k x 2h result holds [forward_i, backward_i].
template <typename Scalar>
struct BiGruTape {
  GruTape<Scalar> fwd, bwd;
};

template <typename Scalar>
Mat<Scalar> bigru_forward(const Mat<Scalar>& inputs,
                          const GruParams<Scalar>& fwd,
                          const GruParams<Scalar>& bwd,
                          const Vec<Scalar>* fwd_mask = nullptr,
                          const Vec<Scalar>* bwd_mask = nullptr,
                          BiGruTape<Scalar>* tape = nullptr) {
  const Index k = inputs.rows(), h = fwd.hidden_dim();
  Mat<Scalar> rev = inputs.colwise().reverse();
  Mat<Scalar> out_f = gru_forward(inputs, fwd, fwd_mask, tape ? &tape->fwd : nullptr);
  Mat<Scalar> out_b = gru_forward(rev, bwd, bwd_mask, tape ? &tape->bwd : nullptr);
  Mat<Scalar> out(k, 2 * h);
  out.leftCols(h) = out_f;
  out.rightCols(h) = out_b.colwise().reverse();
  return out;
}

template <typename Scalar>
void bigru_backward(const GruParams<Scalar>& fwd, const GruParams<Scalar>& bwd,
                    const BiGruTape<Scalar>& tape, const Mat<Scalar>& d_out,
                    GruParams<Scalar>& fwd_grads, GruParams<Scalar>& bwd_grads,
                    Mat<Scalar>& d_inputs) {
  const Index h = fwd.hidden_dim();
  Mat<Scalar> d_rev_inputs = Mat<Scalar>::Zero(d_inputs.rows(), d_inputs.cols());
  gru_backward(fwd, tape.fwd, Mat<Scalar>(d_out.leftCols(h)), fwd_grads,
               d_inputs);
  gru_backward(bwd, tape.bwd,
               Mat<Scalar>(d_out.rightCols(h).colwise().reverse()), bwd_grads,
               d_rev_inputs);
  d_inputs += d_rev_inputs.colwise().reverse();
}

}  // namespace slotfill

#endif  // SLOTFILL_GRU_HPP
