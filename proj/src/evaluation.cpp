#include "slotfill/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

namespace slotfill {

std::vector<Chunk> extract_chunks(const std::vector<std::string>& labels) {
  std::vector<Chunk> chunks;
  bool open = false;
  Chunk cur;
  auto close = [&] {
    if (open) chunks.push_back(cur);
    open = false;
  };
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const BioTag tag = BioTag::parse(labels[t]);
    if (tag.prefix == 'O') {
      close();
    } else if (tag.prefix == 'B' ||
               !(open && cur.name == tag.name && cur.end + 1 == t)) {
      // B- always begins; an I- that does not continue the open chunk of the
      // same concept begins one too (conlleval convention).
      close();
      cur = {tag.name, t, t};
      open = true;
    } else {
      cur.end = t;
    }
  }
  close();
  return chunks;
}

namespace {

void check_aligned(const LabelSequences& gold, const LabelSequences& predicted) {
  require(gold.size() == predicted.size(),
          "gold and predicted utterance counts differ");
  for (std::size_t i = 0; i < gold.size(); ++i)
    require(gold[i].size() == predicted[i].size(),
            "gold/predicted length mismatch in utterance " + std::to_string(i));
}

LabelSequences gold_sequences(const Corpus& corpus) {
  require(corpus.labeled(), "evaluation needs a labeled gold corpus");
  LabelSequences out;
  out.reserve(corpus.size());
  for (const Utterance& u : corpus.utterances) out.push_back(u.labels);
  return out;
}

std::string strip_prefix(const std::string& label) {
  const BioTag tag = BioTag::parse(label);
  return tag.prefix == 'O' ? std::string("O") : tag.name;
}

}  // namespace

F1Score conll_f1(const LabelSequences& gold, const LabelSequences& predicted) {
  check_aligned(gold, predicted);
  F1Score score;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::vector<Chunk> g = extract_chunks(gold[i]);
    std::vector<Chunk> p = extract_chunks(predicted[i]);
    score.gold += long(g.size());
    score.predicted += long(p.size());
    // Chunks are non-overlapping and ordered, so exact matches are the
    // intersection of two sorted sequences.
    for (const Chunk& c : p)
      if (std::find(g.begin(), g.end(), c) != g.end()) ++score.correct;
  }
  return score;
}

F1Score conll_f1(const Corpus& gold, const LabelSequences& predicted) {
  return conll_f1(gold_sequences(gold), predicted);
}

ErrorCounts error_breakdown(const Corpus& gold, const LabelSequences& predicted,
                            bool strip_bio,
                            const std::set<std::string>& stopwords) {
  LabelSequences gs = gold_sequences(gold);
  check_aligned(gs, predicted);
  ErrorCounts out;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    bool utterance_hit = false;
    for (std::size_t t = 0; t < gs[i].size(); ++t) {
      std::string g = gs[i][t], p = predicted[i][t];
      if (strip_bio) {
        g = strip_prefix(g);
        p = strip_prefix(p);
      }
      if (g == p) continue;
      ++out.word_errors;
      utterance_hit = true;
      const std::string& word = gold.utterances[i].words[t];
      if (!stopwords.count(word)) ++out.per_word[word];
    }
    if (utterance_hit) {
      ++out.utterance_errors;
      out.erroneous_utterances.push_back(i);
    }
  }
  return out;
}

EvalReport evaluate(const Corpus& gold, const LabelSequences& predicted,
                    const std::set<std::string>& stopwords) {
  EvalReport report;
  report.chunks = conll_f1(gold, predicted);
  report.with_bio = error_breakdown(gold, predicted, false, stopwords);
  report.concept_only = error_breakdown(gold, predicted, true, stopwords);
  return report;
}

std::vector<std::pair<std::string, long>> top_errors(
    const std::map<std::string, long>& per_word, std::size_t k) {
  std::vector<std::pair<std::string, long>> rows(per_word.begin(), per_word.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

SystemComparison compare_systems(const Corpus& gold, const LabelSequences& pred_a,
                                 const LabelSequences& pred_b, bool strip_bio,
                                 const std::set<std::string>& stopwords) {
  ErrorCounts a = error_breakdown(gold, pred_a, strip_bio, stopwords);
  ErrorCounts b = error_breakdown(gold, pred_b, strip_bio, stopwords);
  SystemComparison cmp;
  std::set_intersection(a.erroneous_utterances.begin(), a.erroneous_utterances.end(),
                        b.erroneous_utterances.begin(), b.erroneous_utterances.end(),
                        std::back_inserter(cmp.shared));
  std::set_difference(a.erroneous_utterances.begin(), a.erroneous_utterances.end(),
                      b.erroneous_utterances.begin(), b.erroneous_utterances.end(),
                      std::back_inserter(cmp.unique_a));
  std::set_difference(b.erroneous_utterances.begin(), b.erroneous_utterances.end(),
                      a.erroneous_utterances.begin(), a.erroneous_utterances.end(),
                      std::back_inserter(cmp.unique_b));
  for (const auto& [word, n] : a.per_word) cmp.per_word[word].first = n;
  for (const auto& [word, n] : b.per_word) cmp.per_word[word].second = n;
  return cmp;
}

FcProfiles accumulate_fc_profiles(const Model& model, const Corpus& test,
                                  const Vocab& vocab) {
  require(vocab.n_words() == model.cfg.n_words &&
              vocab.n_labels() == model.cfg.n_labels,
          "vocabulary does not match the model");
  FcProfiles out;
  out.rows = Matd::Zero(model.cfg.n_words, model.cfg.n_labels);
  out.seen.assign(std::size_t(model.cfg.n_words), 0);
  for (const Utterance& u : test.utterances) {
    if (u.size() == 0) continue;
    const std::vector<int> ids = vocab.encode_words(u);
    const Matd emissions = model.forward(ids, ids.size());
    for (Index t = 0; t < emissions.rows(); ++t) {
      Vecd row = emissions.row(t).transpose();
      const double norm = row.norm();
      if (norm > kNormFloor) row /= norm;
      const int w = ids[std::size_t(t)];
      out.rows.row(w) += row.transpose();
      out.seen[std::size_t(w)] = 1;
    }
  }
  for (Index i = 0; i < out.rows.rows(); ++i) {
    const double norm = out.rows.row(i).norm();
    if (norm > kNormFloor) out.rows.row(i) /= norm;
  }
  return out;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// CDF of the standardized null W+ with an Edgeworth correction for the
// (negative) excess kurtosis of a sum of bounded two-point variables; the
// plain normal approximation is off by up to ~0.014 at n = 12, this brings
// it under 0.002.
double edgeworth_cdf(double z, double gamma2) {
  return normal_cdf(z) - normal_pdf(z) * (gamma2 / 24.0) * (z * z * z - 3.0 * z);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const Vecd& a, const Vecd& b,
                                    WilcoxonMode mode) {
  require(a.size() == b.size(), "wilcoxon needs paired samples of equal length");
  std::vector<double> diffs;
  for (Index i = 0; i < a.size(); ++i) {
    const double d = a(i) - b(i);
    require(std::isfinite(d), "non-finite difference in wilcoxon input");
    if (d != 0.0) diffs.push_back(d);  // zero differences dropped
  }

  WilcoxonResult res;
  res.n_effective = int(diffs.size());
  if (diffs.empty()) {
    res.degenerate = true;
    res.p_value = 1.0;
    return res;
  }

  // Midranks over |d|.
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]]))
      ++j;
    const double mid = 0.5 * double(i + j) + 1.0;  // average of ranks i+1..j+1
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) w_plus += rank[i];
  res.statistic = w_plus;

  const bool use_exact = mode == WilcoxonMode::exact ||
                         (mode == WilcoxonMode::automatic && n <= 12);
  if (use_exact) {
    require(n <= 20, "exact wilcoxon limited to 20 nonzero differences");
    const std::uint64_t total = std::uint64_t(1) << n;
    std::uint64_t at_most = 0, at_least = 0;
    for (std::uint64_t bits = 0; bits < total; ++bits) {
      double w = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (bits & (std::uint64_t(1) << i)) w += rank[i];
      if (w <= w_plus + 1e-9) ++at_most;
      if (w >= w_plus - 1e-9) ++at_least;
    }
    const double tail = double(std::min(at_most, at_least)) / double(total);
    res.p_value = std::min(1.0, 2.0 * tail);
    res.exact = true;
    return res;
  }

  double sum_r = 0.0, sum_r2 = 0.0, sum_r4 = 0.0;
  for (double r : rank) {
    sum_r += r;
    sum_r2 += r * r;
    sum_r4 += r * r * r * r;
  }
  const double mu = sum_r / 2.0;
  const double sigma = std::sqrt(sum_r2 / 4.0);  // subsumes tie correction
  const double gamma2 = (-sum_r4 / 8.0) / std::pow(sigma, 4.0);

  double p;
  if (std::abs(w_plus - mu) < 1e-12) {
    p = 1.0;
  } else if (w_plus > mu) {
    const double z = (w_plus - mu - 0.5) / sigma;
    p = 2.0 * (1.0 - edgeworth_cdf(z, gamma2));
  } else {
    const double z = (w_plus - mu + 0.5) / sigma;
    p = 2.0 * edgeworth_cdf(z, gamma2);
  }
  res.p_value = std::min(1.0, std::max(p, 1e-300));
  return res;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), "cannot open stopword file: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return words;
}

const std::set<std::string>& default_stopwords() {
  // Small default French function-word list; per-word tables on other
  // languages should pass an explicit file instead.
  static const std::set<std::string> words = {
      "le",   "la",    "les",  "de",  "des",  "du",   "un",   "une",  "et",
      "a",    "au",    "aux",  "ce",  "ces",  "cette", "d",   "l",    "en",
      "pour", "par",   "sur",  "dans", "je",  "tu",   "il",   "elle", "nous",
      "vous", "ils",   "elles", "que", "qui", "ne",   "pas",  "plus", "avec",
      "son",  "sa",    "ses",  "mon", "ma",   "mes",  "votre", "vos", "est",
      "sont", "y",     "ou",   "si",  "se",   "s",    "c",    "qu",   "euh",
      "oui",  "non",   "donc", "alors", "the", "of",  "to",   "me",   "on"};
  return words;
}

}  // namespace slotfill
