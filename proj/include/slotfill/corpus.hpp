#ifndef SLOTFILL_CORPUS_HPP
#define SLOTFILL_CORPUS_HPP

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slotfill/types.hpp"

namespace slotfill {

// One BIO label: "B-concept", "I-concept" or "O".
struct BioTag {
  char prefix = 'O';    // 'B', 'I' or 'O'
  std::string name;  // concept name, empty for O

  static BioTag parse(const std::string& surface);
  std::string str() const;
};

struct Utterance {
  std::vector<std::string> words;
  std::vector<std::string> labels;  // empty for unlabeled input

  std::size_t size() const { return words.size(); }
  bool labeled() const { return !labels.empty(); }
};

struct Corpus {
  std::vector<Utterance> utterances;

  std::size_t size() const { return utterances.size(); }
  bool labeled() const;
  std::size_t token_count() const;
};

// Word/label vocabularies with dense 0-based ids. Word ids cover every
// distinct train+dev word in order of first appearance, then the reserved
// <unk> and <pad> entries. Immutable once built.
class Vocab {
 public:
  static const std::string kUnk;
  static const std::string kPad;

  static Vocab build(const Corpus& train, const Corpus& dev);

  int n_words() const { return static_cast<int>(word_by_id_.size()); }
  int n_labels() const { return static_cast<int>(label_by_id_.size()); }
  int unk_id() const { return unk_id_; }
  int pad_id() const { return pad_id_; }

  // OOV maps to <unk>.
  int word_id(const std::string& w) const;
  const std::string& word(int id) const;
  // Unknown labels are an error: the label set is closed.
  int label_id(const std::string& l) const;
  const std::string& label(int id) const;
  bool has_label(const std::string& l) const;

  long count(const std::string& w) const;  // train + dev occurrences
  long train_count(const std::string& w) const;
  long dev_count(const std::string& w) const;

  std::vector<int> encode_words(const Utterance& u) const;
  std::vector<int> encode_labels(const Utterance& u) const;
  std::vector<std::string> decode_words(const std::vector<int>& ids) const;
  std::vector<std::string> decode_labels(const std::vector<int>& ids) const;

  // Words ranked by descending train+dev frequency, ties broken by
  // lexicographic order. Reserved entries excluded.
  std::vector<int> words_by_frequency() const;

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  int intern_word(const std::string& w);
  int intern_label(const std::string& l);

  std::unordered_map<std::string, int> word_ids_;
  std::vector<std::string> word_by_id_;
  std::unordered_map<std::string, int> label_ids_;
  std::vector<std::string> label_by_id_;
  std::vector<long> word_counts_;
  std::unordered_map<std::string, long> train_counts_;
  std::unordered_map<std::string, long> dev_counts_;
  int unk_id_ = -1;
  int pad_id_ = -1;
};

// CoNLL-style text: one "word<TAB-or-space>label" per line, blank line
// between utterances. With require_labels=false, lines may hold a bare word.
Corpus load_conll(const std::string& path, bool require_labels = true);
void save_conll(const Corpus& corpus, const std::string& path);
// Same format with a third column; predicted[i] aligns with utterance i.
void save_conll_predictions(const Corpus& corpus,
                            const std::vector<std::vector<std::string>>& predicted,
                            const std::string& path);

// Positions where I-x follows neither B-x nor I-x. Reported, never repaired.
std::vector<std::size_t> validate_bio(const std::vector<std::string>& labels);

// Vocabulary-coverage reduction: walk words by descending frequency and for
// each uncovered word keep its first m_cap utterances from each split, in
// corpus order, until every vocabulary word is covered.
std::pair<Corpus, Corpus> reduce_corpus(const Corpus& train, const Corpus& dev,
                                        const Vocab& vocab, int m_cap);

}  // namespace slotfill

#endif  // SLOTFILL_CORPUS_HPP
