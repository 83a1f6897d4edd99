#ifndef SLOTFILL_OPTIMIZER_HPP
#define SLOTFILL_OPTIMIZER_HPP

#include <cmath>
#include <vector>

#include "slotfill/model.hpp"
#include "slotfill/types.hpp"

namespace slotfill {

// One Nadam update on a flat parameter array. `t` is the 1-based step count
// after incrementing. Nesterov momentum folded into the Adam update:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   mhat = b1 m / (1 - b1^{t+1}) + (1-b1) g / (1 - b1^t)
//   x <- x - lr * mhat / (sqrt(v / (1 - b2^t)) + eps)
template <typename Scalar>
void nadam_update(Scalar* x, const Scalar* g, Vec<Scalar>& m, Vec<Scalar>& v,
                  long t, Scalar lr, Scalar beta1, Scalar beta2, Scalar eps) {
  const Scalar b1t = Scalar(1) - std::pow(beta1, Scalar(t));
  const Scalar b1t1 = Scalar(1) - std::pow(beta1, Scalar(t + 1));
  const Scalar b2t = Scalar(1) - std::pow(beta2, Scalar(t));
  for (Index i = 0; i < m.size(); ++i) {
    require(std::isfinite(g[i]), "non-finite gradient in optimizer step");
    m(i) = beta1 * m(i) + (Scalar(1) - beta1) * g[i];
    v(i) = beta2 * v(i) + (Scalar(1) - beta2) * g[i] * g[i];
    const Scalar mhat =
        beta1 * m(i) / b1t1 + (Scalar(1) - beta1) * g[i] / b1t;
    const Scalar vhat = std::sqrt(v(i) / b2t) + eps;
    x[i] -= lr * mhat / vhat;
  }
}

// Per-model Nadam state: first/second moment buffers parallel to the model's
// tensor list. Params and grads must expose identical tensor layouts.
class Nadam {
 public:
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  explicit Nadam(Model& params) {
    for (TensorRef t : params.tensors()) {
      m_.emplace_back(Vecd::Zero(t.size()));
      v_.emplace_back(Vecd::Zero(t.size()));
    }
  }

  long step_count() const { return step_; }

  void step(Model& params, Model& grads, double lr) {
    auto p = params.tensors();
    auto g = grads.tensors();
    require(p.size() == m_.size() && g.size() == m_.size(),
            "optimizer state does not match the model");
    ++step_;
    for (std::size_t i = 0; i < p.size(); ++i) {
      require(p[i].size() == m_[i].size(), "tensor shape changed under optimizer");
      nadam_update(p[i].data, g[i].data, m_[i], v_[i], step_, lr, beta1, beta2,
                   eps);
    }
  }

 private:
  std::vector<Vecd> m_, v_;
  long step_ = 0;
};

// Halves the learning rate when the observed dev score has not improved by at
// least `min_improvement` for `patience` consecutive epochs. The wait counter
// resets both on improvement and right after a reduction.
class PlateauSchedule {
 public:
  PlateauSchedule(double lr, int patience, double min_improvement = 1e-6)
      : lr_(lr), patience_(patience), min_improvement_(min_improvement) {
    require(patience >= 1, "plateau patience must be >= 1");
  }

  double observe(double score) {
    if (!has_best_ || score > best_ + min_improvement_) {
      best_ = score;
      has_best_ = true;
      wait_ = 0;
    } else if (++wait_ >= patience_) {
      lr_ *= 0.5;
      wait_ = 0;
    }
    return lr_;
  }

  double lr() const { return lr_; }

 private:
  double lr_;
  int patience_;
  double min_improvement_;
  double best_ = 0.0;
  bool has_best_ = false;
  int wait_ = 0;
};

}  // namespace slotfill

#endif  // SLOTFILL_OPTIMIZER_HPP
