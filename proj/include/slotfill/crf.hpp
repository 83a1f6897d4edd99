#ifndef SLOTFILL_CRF_HPP
#define SLOTFILL_CRF_HPP

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "slotfill/types.hpp"

namespace slotfill {

// Linear-chain CRF over m labels: emission scores come from the network,
// transition/start/end scores live here. No structural BIO constraints.
template <typename Scalar>
struct CrfParams {
  Mat<Scalar> transitions;  // m x m, from-label x to-label
  Vec<Scalar> start, end;   // m

  Index n_labels() const { return start.size(); }

  void setZero(Index m) {
    transitions.setZero(m, m);
    start.setZero(m);
    end.setZero(m);
  }
};

template <typename Scalar>
Scalar log_sum_exp(const Vec<Scalar>& v) {
  const Scalar mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

// Path score of one label sequence.
template <typename Scalar>
Scalar crf_path_score(const Mat<Scalar>& emissions,
                      const std::vector<int>& labels,
                      const CrfParams<Scalar>& p) {
  const Index k = emissions.rows();
  require(static_cast<Index>(labels.size()) == k,
          "label/emission length mismatch");
  Scalar s = p.start(labels[0]) + emissions(0, labels[0]);
  for (Index t = 1; t < k; ++t) {
    s += p.transitions(labels[t - 1], labels[t]) + emissions(t, labels[t]);
  }
  s += p.end(labels[k - 1]);
  return s;
}

// log of the sum over all m^k sequences of exp(score), via the forward
// recursion in log space.
template <typename Scalar>
Scalar crf_log_partition(const Mat<Scalar>& emissions,
                         const CrfParams<Scalar>& p) {
  const Index k = emissions.rows(), m = emissions.cols();
  require(k >= 1, "empty emission matrix");
  Vec<Scalar> alpha = p.start + emissions.row(0).transpose();
  for (Index t = 1; t < k; ++t) {
    Vec<Scalar> next(m);
    for (Index j = 0; j < m; ++j) {
      next(j) = log_sum_exp<Scalar>(alpha + p.transitions.col(j)) +
                emissions(t, j);
    }
    alpha = std::move(next);
  }
  return log_sum_exp<Scalar>(alpha + p.end);
}

// Negative log-likelihood of the gold sequence: log Z - score(gold).
template <typename Scalar>
Scalar crf_sequence_nll(const Mat<Scalar>& emissions,
                        const std::vector<int>& labels,
                        const CrfParams<Scalar>& p) {
  return crf_log_partition(emissions, p) - crf_path_score(emissions, labels, p);
}

// Position posteriors via forward-backward; rows sum to 1.
template <typename Scalar>
Mat<Scalar> crf_marginals(const Mat<Scalar>& emissions,
                          const CrfParams<Scalar>& p) {
  const Index k = emissions.rows(), m = emissions.cols();
  Mat<Scalar> alpha(k, m), beta(k, m);
  alpha.row(0) = (p.start + emissions.row(0).transpose()).transpose();
  for (Index t = 1; t < k; ++t) {
    for (Index j = 0; j < m; ++j) {
      alpha(t, j) =
          log_sum_exp<Scalar>(alpha.row(t - 1).transpose() + p.transitions.col(j)) +
          emissions(t, j);
    }
  }
  beta.row(k - 1) = p.end.transpose();
  for (Index t = k - 2; t >= 0; --t) {
    for (Index i = 0; i < m; ++i) {
      beta(t, i) = log_sum_exp<Scalar>(p.transitions.row(i).transpose() +
                                       emissions.row(t + 1).transpose() +
                                       beta.row(t + 1).transpose());
    }
  }
  const Scalar log_z = log_sum_exp<Scalar>(alpha.row(k - 1).transpose() + p.end);
  return ((alpha + beta).array() - log_z).exp().matrix();
}

// NLL gradients: d/d emissions = marginals - onehot(gold); transition/start/
// end gradients are expected minus observed feature counts. Accumulates into
// the outputs, scaled by `scale`.
template <typename Scalar>
Scalar crf_nll_backward(const Mat<Scalar>& emissions,
                        const std::vector<int>& labels,
                        const CrfParams<Scalar>& p, Scalar scale,
                        Mat<Scalar>& d_emissions, CrfParams<Scalar>& grads) {
  const Index k = emissions.rows(), m = emissions.cols();
  Mat<Scalar> alpha(k, m), beta(k, m);
  alpha.row(0) = (p.start + emissions.row(0).transpose()).transpose();
  for (Index t = 1; t < k; ++t) {
    for (Index j = 0; j < m; ++j) {
      alpha(t, j) =
          log_sum_exp<Scalar>(alpha.row(t - 1).transpose() + p.transitions.col(j)) +
          emissions(t, j);
    }
  }
  beta.row(k - 1) = p.end.transpose();
  for (Index t = k - 2; t >= 0; --t) {
    for (Index i = 0; i < m; ++i) {
      beta(t, i) = log_sum_exp<Scalar>(p.transitions.row(i).transpose() +
                                       emissions.row(t + 1).transpose() +
                                       beta.row(t + 1).transpose());
    }
  }
  const Scalar log_z = log_sum_exp<Scalar>(alpha.row(k - 1).transpose() + p.end);

  Mat<Scalar> marg = ((alpha + beta).array() - log_z).exp().matrix();
  d_emissions += scale * marg;
  for (Index t = 0; t < k; ++t) d_emissions(t, labels[t]) -= scale;

  grads.start += scale * marg.row(0).transpose();
  grads.start(labels[0]) -= scale;
  grads.end += scale * marg.row(k - 1).transpose();
  grads.end(labels[k - 1]) -= scale;

  for (Index t = 0; t + 1 < k; ++t) {
    // pairwise posteriors P(y_t = i, y_{t+1} = j)
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        const Scalar lp = alpha(t, i) + p.transitions(i, j) +
                          emissions(t + 1, j) + beta(t + 1, j) - log_z;
        grads.transitions(i, j) += scale * std::exp(lp);
      }
    }
    grads.transitions(labels[t], labels[t + 1]) -= scale;
  }
  return log_z - crf_path_score(emissions, labels, p);
}

// Best-scoring sequence and its score. Ties pick the lowest label id at the
// final position and at every backtrack step.
template <typename Scalar>
std::pair<std::vector<int>, Scalar> crf_viterbi(const Mat<Scalar>& emissions,
                                                const CrfParams<Scalar>& p) {
  const Index k = emissions.rows(), m = emissions.cols();
  require(k >= 1, "empty emission matrix");
  Mat<Scalar> delta(k, m);
  Eigen::MatrixXi back(k, m);
  delta.row(0) = (p.start + emissions.row(0).transpose()).transpose();
  back.row(0).setConstant(-1);
  for (Index t = 1; t < k; ++t) {
    for (Index j = 0; j < m; ++j) {
      Index best = 0;
      Scalar best_v = delta(t - 1, 0) + p.transitions(0, j);
      for (Index i = 1; i < m; ++i) {
        const Scalar v = delta(t - 1, i) + p.transitions(i, j);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      delta(t, j) = best_v + emissions(t, j);
      back(t, j) = static_cast<int>(best);
    }
  }
  Index best = 0;
  Scalar best_v = delta(k - 1, 0) + p.end(0);
  for (Index j = 1; j < m; ++j) {
    const Scalar v = delta(k - 1, j) + p.end(j);
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  std::vector<int> path(k);
  path[k - 1] = static_cast<int>(best);
  for (Index t = k - 1; t > 0; --t) path[t - 1] = back(t, path[t]);
  return {path, best_v};
}

// Per-token softmax cross-entropy, the CRF-free ablation loss. Returns the
// summed loss; gradient is softmax(e_t) - onehot(gold_t) per row.
template <typename Scalar>
Scalar softmax_nll(const Mat<Scalar>& emissions, const std::vector<int>& labels,
                   Scalar scale, Mat<Scalar>* d_emissions = nullptr) {
  const Index k = emissions.rows();
  Scalar loss = 0;
  for (Index t = 0; t < k; ++t) {
    const Vec<Scalar> row = emissions.row(t).transpose();
    const Scalar lse = log_sum_exp<Scalar>(row);
    loss += lse - row(labels[t]);
    if (d_emissions) {
      d_emissions->row(t) +=
          scale * ((row.array() - lse).exp().matrix()).transpose();
      (*d_emissions)(t, labels[t]) -= scale;
    }
  }
  return loss;
}

}  // namespace slotfill

#endif  // SLOTFILL_CRF_HPP
