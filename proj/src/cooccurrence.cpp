#include "slotfill/cooccurrence.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slotfill {

CooccurrenceMatrix::CooccurrenceMatrix(Index n_labels, Index n_words) {
  require(n_labels > 0 && n_words > 0, "co-occurrence matrix needs m, n > 0");
  raw_.setZero(n_labels, n_words);
}

CooccurrenceMatrix CooccurrenceMatrix::count(const Corpus& train,
                                             const Vocab& vocab) {
  CooccurrenceMatrix mc(vocab.n_labels(), vocab.n_words());
  for (const auto& u : train.utterances) {
    require(u.labeled(), "co-occurrence counting needs a fully labeled corpus");
    for (std::size_t i = 0; i < u.size(); ++i) {
      mc.add(vocab.label_id(u.labels[i]), vocab.word_id(u.words[i]));
    }
  }
  return mc;
}

void CooccurrenceMatrix::add(Index label, Index word, long n) {
  require(!finalized_, "co-occurrence matrix is finalized");
  require(label >= 0 && label < raw_.rows() && word >= 0 && word < raw_.cols(),
          "co-occurrence index out of range");
  raw_(label, word) += n;
}

void CooccurrenceMatrix::finalize() {
  require(!finalized_, "finalize called twice on a co-occurrence matrix");
  values_ = (raw_.cast<double>().array() + 1.0).matrix();
  Vecd row_sums = values_.rowwise().sum();
  values_.array().colwise() /= row_sums.array();
  finalized_ = true;
}

const Matd& CooccurrenceMatrix::values() const {
  require(finalized_, "co-occurrence matrix not finalized");
  return values_;
}

void CooccurrenceMatrix::save(const std::string& path) const {
  require(finalized_, "co-occurrence matrix not finalized");
  std::FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, "cannot write co-occurrence file: " + path);
  std::fprintf(f, "%" PRId64 " %" PRId64 "\n",
               static_cast<std::int64_t>(raw_.rows()),
               static_cast<std::int64_t>(raw_.cols()));
  for (Index j = 0; j < values_.rows(); ++j) {
    for (Index i = 0; i < values_.cols(); ++i) {
      std::fprintf(f, "%s%.17g", i == 0 ? "" : " ", values_(j, i));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

CooccurrenceMatrix CooccurrenceMatrix::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open co-occurrence file: " + path);
  Index m = 0, n = 0;
  in >> m >> n;
  require(in.good() && m > 0 && n > 0,
          "malformed co-occurrence header in " + path);
  CooccurrenceMatrix mc(m, n);
  mc.values_.resize(m, n);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      require(static_cast<bool>(in >> mc.values_(j, i)),
              "truncated co-occurrence file: " + path);
    }
  }
  mc.finalized_ = true;
  return mc;
}

}  // namespace slotfill
