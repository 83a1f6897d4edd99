#ifndef SLOTFILL_DENSE_HPP
#define SLOTFILL_DENSE_HPP

#include <cmath>
#include <utility>

#include "slotfill/types.hpp"

namespace slotfill {

enum class Activation { none, relu, tanh };

template <typename Scalar>
struct DenseParams {
  Mat<Scalar> weight;  // in x out
  Vec<Scalar> bias;    // out

  Index input_dim() const { return weight.rows(); }
  Index output_dim() const { return weight.cols(); }

  void setZero(Index in, Index out) {
    weight.setZero(in, out);
    bias.setZero(out);
  }
};

template <typename Scalar>
struct DenseTape {
  Mat<Scalar> inputs;   // k x in
  Mat<Scalar> pre_act;  // k x out
};

// Row-wise affine map plus optional activation: out = act(x W + b).
template <typename Scalar>
Mat<Scalar> dense_forward(const Mat<Scalar>& x, const DenseParams<Scalar>& p,
                          Activation act = Activation::none,
                          DenseTape<Scalar>* tape = nullptr) {
  require(x.cols() == p.input_dim(), "dense input dimension mismatch");
  Mat<Scalar> pre = (x * p.weight).rowwise() + p.bias.transpose();
  Mat<Scalar> out;
  switch (act) {
    case Activation::none:
      out = pre;
      break;
    case Activation::relu:
      out = pre.cwiseMax(Scalar(0));
      break;
    case Activation::tanh:
      out = pre.array().tanh().matrix();
      break;
  }
  if (tape) {
    tape->inputs = x;
    tape->pre_act = std::move(pre);
  }
  return out;
}

template <typename Scalar>
void dense_backward(const DenseParams<Scalar>& p, const DenseTape<Scalar>& tape,
                    Activation act, const Mat<Scalar>& d_out,
                    DenseParams<Scalar>& grads, Mat<Scalar>& d_inputs) {
  Mat<Scalar> d_pre;
  switch (act) {
    case Activation::none:
      d_pre = d_out;
      break;
    case Activation::relu:
      d_pre = (tape.pre_act.array() > Scalar(0))
                  .select(d_out, Mat<Scalar>::Zero(d_out.rows(), d_out.cols()));
      break;
    case Activation::tanh: {
      Mat<Scalar> t = tape.pre_act.array().tanh().matrix();
      d_pre = d_out.cwiseProduct(
          (Mat<Scalar>::Ones(t.rows(), t.cols()) - t.cwiseProduct(t)));
      break;
    }
  }
  grads.weight.noalias() += tape.inputs.transpose() * d_pre;
  grads.bias += d_pre.colwise().sum().transpose();
  d_inputs.noalias() += d_pre * p.weight.transpose();
}

}  // namespace slotfill

#endif  // SLOTFILL_DENSE_HPP
