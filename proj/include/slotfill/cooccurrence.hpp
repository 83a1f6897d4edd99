#ifndef SLOTFILL_COOCCURRENCE_HPP
#define SLOTFILL_COOCCURRENCE_HPP

#include <string>

#include "slotfill/corpus.hpp"
#include "slotfill/types.hpp"

namespace slotfill {

// Label-by-word association counts from a labeled corpus. finalize() applies
// add-one smoothing and row normalization; rows then sum to 1 and every
// entry is strictly positive. Raw counts are kept for analysis.
class CooccurrenceMatrix {
 public:
  // Zero matrix of the given shape; fill via add() or count().
  CooccurrenceMatrix(Index n_labels, Index n_words);

  static CooccurrenceMatrix count(const Corpus& train, const Vocab& vocab);

  void add(Index label, Index word, long n = 1);
  void finalize();
  bool finalized() const { return finalized_; }

  Index n_labels() const { return raw_.rows(); }
  Index n_words() const { return raw_.cols(); }
  const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& raw() const {
    return raw_;
  }
  // Smoothed, row-normalized values; only valid after finalize().
  const Matd& values() const;
  long total_count() const { return raw_.sum(); }

  // Text sidecar: "m n" header, then one row of full-precision decimals per
  // label. Round-trips bit-exactly at double precision.
  void save(const std::string& path) const;
  static CooccurrenceMatrix load(const std::string& path);

 private:
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> raw_;
  Matd values_;
  bool finalized_ = false;
};

}  // namespace slotfill

#endif  // SLOTFILL_COOCCURRENCE_HPP
