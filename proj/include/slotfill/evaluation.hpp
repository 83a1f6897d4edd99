#ifndef SLOTFILL_EVALUATION_HPP
#define SLOTFILL_EVALUATION_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slotfill/corpus.hpp"
#include "slotfill/model.hpp"
#include "slotfill/types.hpp"

namespace slotfill {

// Maximal [B-x, I-x...] run; end is inclusive. Illegal I- continuations start
// a new chunk, following the standard CoNLL evaluation convention.
struct Chunk {
  std::string name;  // concept
  std::size_t start = 0, end = 0;
  friend bool operator==(const Chunk&, const Chunk&) = default;
  friend auto operator<=>(const Chunk&, const Chunk&) = default;
};

std::vector<Chunk> extract_chunks(const std::vector<std::string>& labels);

struct F1Score {
  long gold = 0, predicted = 0, correct = 0;
  double precision() const { return predicted ? double(correct) / double(predicted) : 0.0; }
  double recall() const { return gold ? double(correct) / double(gold) : 0.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return (p + r > 0) ? 2.0 * p * r / (p + r) : 0.0;
  }
};

using LabelSequences = std::vector<std::vector<std::string>>;

F1Score conll_f1(const LabelSequences& gold, const LabelSequences& predicted);
F1Score conll_f1(const Corpus& gold, const LabelSequences& predicted);

// Word/utterance-level mismatch counts for one stripping mode. The per-word
// table skips stopwords so frequent function words do not drown the tally.
struct ErrorCounts {
  long word_errors = 0;
  long utterance_errors = 0;
  std::vector<std::size_t> erroneous_utterances;  // ascending ids
  std::map<std::string, long> per_word;           // non-stop words only
};

ErrorCounts error_breakdown(const Corpus& gold, const LabelSequences& predicted,
                            bool strip_bio,
                            const std::set<std::string>& stopwords = {});

// Full report: chunk F1 plus both stripping modes (Table-4-shaped).
struct EvalReport {
  F1Score chunks;
  ErrorCounts with_bio;
  ErrorCounts concept_only;  // BIO prefixes stripped before comparison
};

EvalReport evaluate(const Corpus& gold, const LabelSequences& predicted,
                    const std::set<std::string>& stopwords = {});

std::vector<std::pair<std::string, long>> top_errors(
    const std::map<std::string, long>& per_word, std::size_t k);

// Two-system utterance-level error partition: shared + unique_a = total_a.
struct SystemComparison {
  std::vector<std::size_t> shared, unique_a, unique_b;
  // word -> (errors under A, errors under B), words with any error only
  std::map<std::string, std::pair<long, long>> per_word;
};

SystemComparison compare_systems(const Corpus& gold, const LabelSequences& pred_a,
                                 const LabelSequences& pred_b,
                                 bool strip_bio = false,
                                 const std::set<std::string>& stopwords = {});

// Per-word accumulated l2-normalized pre-CRF FC outputs over a test corpus
// (n x m); rows l2-normalized again at the end. seen[i] marks words that
// actually occurred; the rest are excluded from downstream tests.
struct FcProfiles {
  Matd rows;
  std::vector<char> seen;
};

FcProfiles accumulate_fc_profiles(const Model& model, const Corpus& test,
                                  const Vocab& vocab);

enum class WilcoxonMode { automatic, exact, normal };

struct WilcoxonResult {
  double statistic = 0.0;  // W+ = sum of ranks of positive differences
  double p_value = 1.0;    // two-sided
  int n_effective = 0;     // pairs with nonzero difference
  bool degenerate = false; // all differences zero
  bool exact = false;      // exact enumeration used
};

// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped;
// ties get midranks. Exact null enumeration when n_effective <= 12 (or
// forced); otherwise a normal approximation with continuity correction and an
// Edgeworth kurtosis term, which keeps it within 0.01 of exact at n = 12.
WilcoxonResult wilcoxon_signed_rank(const Vecd& a, const Vecd& b,
                                    WilcoxonMode mode = WilcoxonMode::automatic);

std::set<std::string> load_stopwords(const std::string& path);
const std::set<std::string>& default_stopwords();

}  // namespace slotfill

#endif  // SLOTFILL_EVALUATION_HPP
