#ifndef SLOTFILL_LABEL_SPACE_HPP
#define SLOTFILL_LABEL_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>

#include "slotfill/types.hpp"

namespace slotfill {

// Cosine distance assigned when a vector has (numerically) zero norm, and
// the padding value used outside the context window. Both sit at the
// "orthogonal" point of the [0, 2] distance range.
inline constexpr double kDegenerateDistance = 1.0;
inline constexpr double kWindowPad = 1.0;
inline constexpr double kNormFloor = 1e-12;

// Label vectors from word vectors and a row-normalized association matrix:
// rows of assoc are scaled per label, rows of word_vecs per word, and the
// product places every label at a weighted centroid of its words.
//   assoc: m x n, word_vecs: n x d, label_scale: m, word_scale: n.
template <typename Scalar>
Mat<Scalar> label_embeddings(const Mat<Scalar>& assoc,
                             const Mat<Scalar>& word_vecs,
                             const Vec<Scalar>& label_scale,
                             const Vec<Scalar>& word_scale) {
  require(assoc.cols() == word_vecs.rows(), "assoc/word_vecs shape mismatch");
  require(label_scale.size() == assoc.rows(), "label_scale size mismatch");
  require(word_scale.size() == word_vecs.rows(), "word_scale size mismatch");
  Mat<Scalar> scaled_words = word_scale.asDiagonal() * word_vecs;  // n x d
  return label_scale.asDiagonal() * (assoc * scaled_words);        // m x d
}

// Accumulates gradients of the above for upstream d_label_vecs (m x d).
template <typename Scalar>
void label_embeddings_backward(const Mat<Scalar>& assoc,
                               const Mat<Scalar>& word_vecs,
                               const Vec<Scalar>& label_scale,
                               const Vec<Scalar>& word_scale,
                               const Mat<Scalar>& d_label_vecs,
                               Mat<Scalar>& d_word_vecs,
                               Vec<Scalar>& d_label_scale,
                               Vec<Scalar>& d_word_scale) {
  Mat<Scalar> scaled_words = word_scale.asDiagonal() * word_vecs;      // n x d
  Mat<Scalar> scaled_assoc = label_scale.asDiagonal() * assoc;         // m x n
  Mat<Scalar> d_scaled_words = scaled_assoc.transpose() * d_label_vecs;  // n x d
  d_word_vecs.noalias() += word_scale.asDiagonal() * d_scaled_words;
  d_word_scale.noalias() +=
      (d_scaled_words.array() * word_vecs.array()).rowwise().sum().matrix();
  // d wrt the label scaling: contract d_label_vecs with the unscaled product.
  Mat<Scalar> unscaled = assoc * scaled_words;  // m x d
  d_label_scale.noalias() +=
      (d_label_vecs.array() * unscaled.array()).rowwise().sum().matrix();
}

// Cosine distances 1 - cos(word_i, label_j) for one utterance.
// word_vecs: k x d (per-position embeddings), label_vecs: m x d.
// Zero-norm rows yield kDegenerateDistance and bump *degenerate_count.
template <typename Scalar>
Mat<Scalar> plain_distances(const Mat<Scalar>& word_vecs,
                            const Mat<Scalar>& label_vecs,
                            long* degenerate_count = nullptr) {
  require(word_vecs.cols() == label_vecs.cols(),
          "word/label vector dimension mismatch");
  const Index k = word_vecs.rows(), m = label_vecs.rows();
  Vec<Scalar> wn = word_vecs.rowwise().norm();
  Vec<Scalar> ln = label_vecs.rowwise().norm();
  Mat<Scalar> dist(k, m);
  Mat<Scalar> dots = word_vecs * label_vecs.transpose();  // k x m
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (wn(i) < kNormFloor || ln(j) < kNormFloor) {
        dist(i, j) = Scalar(kDegenerateDistance);
        if (degenerate_count) ++*degenerate_count;
      } else {
        dist(i, j) = Scalar(1) - dots(i, j) / (wn(i) * ln(j));
      }
    }
  }
  return dist;
}

template <typename Scalar>
void plain_distances_backward(const Mat<Scalar>& word_vecs,
                              const Mat<Scalar>& label_vecs,
                              const Mat<Scalar>& d_dist,
                              Mat<Scalar>& d_word_vecs,
                              Mat<Scalar>& d_label_vecs) {
  const Index k = word_vecs.rows(), m = label_vecs.rows();
  Vec<Scalar> wn = word_vecs.rowwise().norm();
  Vec<Scalar> ln = label_vecs.rowwise().norm();
  Mat<Scalar> dots = word_vecs * label_vecs.transpose();
  for (Index i = 0; i < k; ++i) {
    if (wn(i) < kNormFloor) continue;  // degenerate entries carry no gradient
    for (Index j = 0; j < m; ++j) {
      if (ln(j) < kNormFloor) continue;
      const Scalar g = d_dist(i, j);
      if (g == Scalar(0)) continue;
      const Scalar inv = Scalar(1) / (wn(i) * ln(j));
      const Scalar cos = dots(i, j) * inv;
      // d(1-cos)/du = -v/(|u||v|) + cos * u/|u|^2, symmetrically for v.
      d_word_vecs.row(i) +=
          g * (cos / (wn(i) * wn(i)) * word_vecs.row(i) - inv * label_vecs.row(j));
      d_label_vecs.row(j) +=
          g * (cos / (ln(j) * ln(j)) * label_vecs.row(j) - inv * word_vecs.row(i));
    }
  }
}

// Backward bookkeeping for windowed_distances: pre-activations and the label
// column picked by each pooling block.
template <typename Scalar>
struct WindowTape {
  Mat<Scalar> pre_act;           // k x m
  Eigen::MatrixXi pool_argmax;   // k x ceil(m/stride)
};

inline Index pooled_width(Index m, int stride) {
  return (m + stride - 1) / stride;
}

// Context-weighted distances: each (i, j) takes the window of plain
// distances around position i (pad kWindowPad outside the utterance),
// weighted by window_weights (length 2q+1), through ReLU, then max pooling
// with the given stride along the label axis.
template <typename Scalar>
Mat<Scalar> windowed_distances(const Mat<Scalar>& plain,
                               const Vec<Scalar>& window_weights, int half_window,
                               int pool_stride, WindowTape<Scalar>* tape = nullptr) {
  require(window_weights.size() == 2 * half_window + 1,
          "window weight vector must have length 2q+1");
  require(pool_stride >= 1, "pool stride must be >= 1");
  const Index k = plain.rows(), m = plain.cols();
  Mat<Scalar> act(k, m);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < m; ++j) {
      Scalar s = 0;
      for (int p = -half_window; p <= half_window; ++p) {
        const Index row = i + p;
        const Scalar v = (row >= 0 && row < k) ? plain(row, j)
                                               : Scalar(kWindowPad);
        s += window_weights(p + half_window) * v;
      }
      act(i, j) = s;
    }
  }
  const Index width = pooled_width(m, pool_stride);
  Mat<Scalar> out(k, width);
  Eigen::MatrixXi argmax(k, width);
  for (Index i = 0; i < k; ++i) {
    for (Index b = 0; b < width; ++b) {
      const Index lo = b * pool_stride;
      const Index hi = std::min<Index>(lo + pool_stride, m);
      Index best = lo;
      Scalar best_v = std::max(Scalar(0), act(i, lo));
      for (Index j = lo + 1; j < hi; ++j) {
        const Scalar v = std::max(Scalar(0), act(i, j));
        if (v > best_v) {
          best_v = v;
          best = j;
        }
      }
      out(i, b) = best_v;
      argmax(i, b) = static_cast<int>(best);
    }
  }
  if (tape) {
    tape->pre_act = std::move(act);
    tape->pool_argmax = std::move(argmax);
  }
  return out;
}

template <typename Scalar>
void windowed_distances_backward(const Mat<Scalar>& plain,
                                 const Vec<Scalar>& window_weights,
                                 int half_window, int pool_stride,
                                 const WindowTape<Scalar>& tape,
                                 const Mat<Scalar>& d_out, Mat<Scalar>& d_plain,
                                 Vec<Scalar>& d_window_weights) {
  const Index k = plain.rows(), m = plain.cols();
  Mat<Scalar> d_act = Mat<Scalar>::Zero(k, m);
  for (Index i = 0; i < k; ++i) {
    for (Index b = 0; b < d_out.cols(); ++b) {
      const Index j = tape.pool_argmax(i, b);
      if (tape.pre_act(i, j) > Scalar(0)) d_act(i, j) += d_out(i, b);
    }
  }
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < m; ++j) {
      const Scalar g = d_act(i, j);
      if (g == Scalar(0)) continue;
      for (int p = -half_window; p <= half_window; ++p) {
        const Index row = i + p;
        const Scalar v = (row >= 0 && row < k) ? plain(row, j)
                                               : Scalar(kWindowPad);
        d_window_weights(p + half_window) += g * v;
        if (row >= 0 && row < k)
          d_plain(row, j) += g * window_weights(p + half_window);
      }
    }
  }
}

// Pretrained word vectors, "word v1 ... vd" per line. Words missing from the
// file keep their rows in `vectors` untouched (callers pre-fill with the
// random initialization). Returns how many vocabulary words were found.
template <typename Vocab>
Index load_pretrained_embeddings(const std::string& path, const Vocab& vocab,
                                 Matd& vectors) {
  std::ifstream in(path);
  require(in.good(), "cannot open embedding file: " + path);
  std::string line;
  Index found = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string w;
    is >> w;
    int id = vocab.word_id(w);
    if (id == vocab.unk_id() && w != Vocab::kUnk) continue;
    for (Index c = 0; c < vectors.cols(); ++c) {
      require(static_cast<bool>(is >> vectors(id, c)),
              path + ":" + std::to_string(lineno) +
                  ": embedding row shorter than --embed-dim");
    }
    ++found;
  }
  return found;
}

}  // namespace slotfill

#endif  // SLOTFILL_LABEL_SPACE_HPP
