#include "slotfill/corpus.hpp"

#include <algorithm>
#include <fstream>

namespace slotfill {

const std::string Vocab::kUnk = "<unk>";
const std::string Vocab::kPad = "<pad>";

BioTag BioTag::parse(const std::string& surface) {
  if (surface == "O") return BioTag{'O', ""};
  if (surface.size() >= 3 && (surface[0] == 'B' || surface[0] == 'I') &&
      surface[1] == '-') {
    return BioTag{surface[0], surface.substr(2)};
  }
  throw Error("not a BIO label: '" + surface + "'");
}

std::string BioTag::str() const {
  if (prefix == 'O') return "O";
  return std::string(1, prefix) + "-" + name;
}

bool Corpus::labeled() const {
  for (const auto& u : utterances)
    if (!u.labeled()) return false;
  return true;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& u : utterances) n += u.size();
  return n;
}

namespace {

// Splits "word<SEP>label" with SEP = tab or single space. Extra separators
// are a format error; column reported 1-based.
bool split_token_line(const std::string& line, std::string* word,
                      std::string* label, std::size_t* bad_col) {
  std::size_t sep = line.find_first_of(" \t");
  if (sep == std::string::npos) {
    *word = line;
    label->clear();
    return true;
  }
  if (sep == 0) {
    *bad_col = 1;
    return false;
  }
  *word = line.substr(0, sep);
  *label = line.substr(sep + 1);
  if (label->empty() || label->find_first_of(" \t") != std::string::npos) {
    *bad_col = sep + 2 + (label->empty() ? 0 : label->find_first_of(" \t"));
    return false;
  }
  return true;
}

}  // namespace

Corpus load_conll(const std::string& path, bool require_labels) {
  std::ifstream in(path);
  require(in.good(), "cannot open corpus file: " + path);

  Corpus corpus;
  Utterance current;
  std::string line;
  std::size_t lineno = 0;
  bool saw_token = false;

  auto flush = [&]() {
    if (!current.words.empty()) corpus.utterances.push_back(std::move(current));
    current = Utterance{};
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::string word, label;
    std::size_t bad_col = 0;
    if (!split_token_line(line, &word, &label, &bad_col)) {
      throw Error(path + ":" + std::to_string(lineno) + ":" +
                  std::to_string(bad_col) + ": malformed token line");
    }
    if (label.empty() && require_labels) {
      throw Error(path + ":" + std::to_string(lineno) + ":" +
                  std::to_string(word.size() + 1) + ": missing label");
    }
    saw_token = true;
    current.words.push_back(word);
    if (!label.empty()) {
      require(current.labels.size() == current.words.size() - 1,
              path + ":" + std::to_string(lineno) +
                  ": labeled and unlabeled lines mixed within one utterance");
      current.labels.push_back(label);
    } else {
      require(current.labels.empty(),
              path + ":" + std::to_string(lineno) +
                  ": labeled and unlabeled lines mixed within one utterance");
    }
  }
  flush();
  require(saw_token, "empty corpus file: " + path);
  return corpus;
}

void save_conll(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write corpus file: " + path);
  for (const auto& u : corpus.utterances) {
    for (std::size_t i = 0; i < u.words.size(); ++i) {
      out << u.words[i];
      if (u.labeled()) out << '\t' << u.labels[i];
      out << '\n';
    }
    out << '\n';
  }
}

void save_conll_predictions(const Corpus& corpus,
                            const std::vector<std::vector<std::string>>& predicted,
                            const std::string& path) {
  require(predicted.size() == corpus.size(),
          "prediction/corpus utterance count mismatch");
  std::ofstream out(path);
  require(out.good(), "cannot write prediction file: " + path);
  for (std::size_t ui = 0; ui < corpus.size(); ++ui) {
    const auto& u = corpus.utterances[ui];
    require(predicted[ui].size() == u.size(), "prediction length mismatch");
    for (std::size_t i = 0; i < u.words.size(); ++i) {
      out << u.words[i] << '\t' << (u.labeled() ? u.labels[i] : "O") << '\t'
          << predicted[ui][i] << '\n';
    }
    out << '\n';
  }
}

int Vocab::intern_word(const std::string& w) {
  auto it = word_ids_.find(w);
  if (it != word_ids_.end()) return it->second;
  int id = static_cast<int>(word_by_id_.size());
  word_ids_.emplace(w, id);
  word_by_id_.push_back(w);
  word_counts_.push_back(0);
  return id;
}

int Vocab::intern_label(const std::string& l) {
  auto it = label_ids_.find(l);
  if (it != label_ids_.end()) return it->second;
  int id = static_cast<int>(label_by_id_.size());
  label_ids_.emplace(l, id);
  label_by_id_.push_back(l);
  return id;
}

Vocab Vocab::build(const Corpus& train, const Corpus& dev) {
  require(train.size() > 0, "cannot build a vocabulary from an empty corpus");
  Vocab v;
  auto scan = [&](const Corpus& c, std::unordered_map<std::string, long>& split) {
    for (const auto& u : c.utterances) {
      for (const auto& w : u.words) {
        int id = v.intern_word(w);
        ++v.word_counts_[id];
        ++split[w];
      }
      for (const auto& l : u.labels) v.intern_label(l);
    }
  };
  scan(train, v.train_counts_);
  scan(dev, v.dev_counts_);
  v.unk_id_ = v.intern_word(kUnk);
  v.pad_id_ = v.intern_word(kPad);
  return v;
}

int Vocab::word_id(const std::string& w) const {
  auto it = word_ids_.find(w);
  return it == word_ids_.end() ? unk_id_ : it->second;
}

const std::string& Vocab::word(int id) const {
  require(id >= 0 && id < n_words(), "word id out of range");
  return word_by_id_[id];
}

int Vocab::label_id(const std::string& l) const {
  auto it = label_ids_.find(l);
  require(it != label_ids_.end(), "label not in vocabulary: '" + l + "'");
  return it->second;
}

bool Vocab::has_label(const std::string& l) const {
  return label_ids_.count(l) > 0;
}

const std::string& Vocab::label(int id) const {
  require(id >= 0 && id < n_labels(), "label id out of range");
  return label_by_id_[id];
}

long Vocab::count(const std::string& w) const {
  auto it = word_ids_.find(w);
  return it == word_ids_.end() ? 0 : word_counts_[it->second];
}

long Vocab::train_count(const std::string& w) const {
  auto it = train_counts_.find(w);
  return it == train_counts_.end() ? 0 : it->second;
}

long Vocab::dev_count(const std::string& w) const {
  auto it = dev_counts_.find(w);
  return it == dev_counts_.end() ? 0 : it->second;
}

std::vector<int> Vocab::encode_words(const Utterance& u) const {
  std::vector<int> ids;
  ids.reserve(u.words.size());
  for (const auto& w : u.words) ids.push_back(word_id(w));
  return ids;
}

std::vector<int> Vocab::encode_labels(const Utterance& u) const {
  require(u.labeled(), "utterance has no labels to encode");
  std::vector<int> ids;
  ids.reserve(u.labels.size());
  for (const auto& l : u.labels) ids.push_back(label_id(l));
  return ids;
}

std::vector<std::string> Vocab::decode_words(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(word(id));
  return out;
}

std::vector<std::string> Vocab::decode_labels(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(label(id));
  return out;
}

std::vector<int> Vocab::words_by_frequency() const {
  std::vector<int> ids;
  for (int i = 0; i < n_words(); ++i)
    if (i != unk_id_ && i != pad_id_) ids.push_back(i);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (word_counts_[a] != word_counts_[b])
      return word_counts_[a] > word_counts_[b];
    return word_by_id_[a] < word_by_id_[b];
  });
  return ids;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), "cannot write vocabulary file: " + path);
  out << "#words " << n_words() << '\n';
  for (int i = 0; i < n_words(); ++i)
    out << word_by_id_[i] << '\t' << i << '\t' << word_counts_[i] << '\n';
  out << "#labels " << n_labels() << '\n';
  for (int i = 0; i < n_labels(); ++i)
    out << label_by_id_[i] << '\t' << i << '\t' << 0 << '\n';
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open vocabulary file: " + path);
  Vocab v;
  std::string line;
  int section = 0;  // 1 = words, 2 = labels
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("#words", 0) == 0) {
      section = 1;
      continue;
    }
    if (line.rfind("#labels", 0) == 0) {
      section = 2;
      continue;
    }
    std::size_t t1 = line.find('\t');
    std::size_t t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
    require(t1 != std::string::npos && t2 != std::string::npos && section != 0,
            path + ":" + std::to_string(lineno) + ": malformed vocabulary line");
    std::string token = line.substr(0, t1);
    int id = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
    long cnt = std::stol(line.substr(t2 + 1));
    if (section == 1) {
      require(id == v.intern_word(token),
              path + ":" + std::to_string(lineno) + ": non-dense word id");
      v.word_counts_[id] = cnt;
    } else {
      require(id == v.intern_label(token),
              path + ":" + std::to_string(lineno) + ": non-dense label id");
    }
  }
  require(v.n_words() >= 2, "vocabulary file has no words: " + path);
  v.unk_id_ = v.word_ids_.count(kUnk) ? v.word_ids_[kUnk] : -1;
  v.pad_id_ = v.word_ids_.count(kPad) ? v.word_ids_[kPad] : -1;
  require(v.unk_id_ >= 0 && v.pad_id_ >= 0,
          "vocabulary file lacks reserved entries: " + path);
  return v;
}

std::vector<std::size_t> validate_bio(const std::vector<std::string>& labels) {
  std::vector<std::size_t> violations;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    BioTag tag = BioTag::parse(labels[i]);
    if (tag.prefix != 'I') continue;
    bool legal = false;
    if (i > 0) {
      BioTag prev = BioTag::parse(labels[i - 1]);
      legal = (prev.prefix == 'B' || prev.prefix == 'I') &&
              prev.name == tag.name;
    }
    if (!legal) violations.push_back(i);
  }
  return violations;
}

namespace {

// Per-word posting lists in corpus order.
std::vector<std::vector<std::size_t>> build_postings(const Corpus& c,
                                                     const Vocab& vocab) {
  std::vector<std::vector<std::size_t>> postings(vocab.n_words());
  for (std::size_t ui = 0; ui < c.size(); ++ui) {
    for (const auto& w : c.utterances[ui].words) {
      int id = vocab.word_id(w);
      auto& list = postings[id];
      if (list.empty() || list.back() != ui) list.push_back(ui);
    }
  }
  return postings;
}

}  // namespace

std::pair<Corpus, Corpus> reduce_corpus(const Corpus& train, const Corpus& dev,
                                        const Vocab& vocab, int m_cap) {
  require(m_cap >= 1, "m_cap must be >= 1");

  auto train_postings = build_postings(train, vocab);
  auto dev_postings = build_postings(dev, vocab);

  std::vector<bool> covered(vocab.n_words(), false);
  covered[vocab.unk_id()] = true;
  covered[vocab.pad_id()] = true;
  // Words never occurring in either split cannot be covered; there are none
  // when the vocabulary was built from these corpora.
  std::size_t uncovered = 0;
  for (int i = 0; i < vocab.n_words(); ++i) {
    if (covered[i]) continue;
    if (train_postings[i].empty() && dev_postings[i].empty())
      covered[i] = true;
    else
      ++uncovered;
  }

  std::vector<bool> keep_train(train.size(), false);
  std::vector<bool> keep_dev(dev.size(), false);

  auto cover_words = [&](const Utterance& u) {
    for (const auto& w : u.words) {
      int id = vocab.word_id(w);
      if (!covered[id]) {
        covered[id] = true;
        --uncovered;
      }
    }
  };
  auto select = [&](const Corpus& c, const std::vector<std::size_t>& posting,
                    std::vector<bool>& keep) {
    int taken = 0;
    for (std::size_t ui : posting) {
      if (taken == m_cap || uncovered == 0) break;
      ++taken;
      if (keep[ui]) continue;
      keep[ui] = true;
      cover_words(c.utterances[ui]);
    }
  };

  for (int wid : vocab.words_by_frequency()) {
    if (uncovered == 0) break;
    if (covered[wid]) continue;
    select(train, train_postings[wid], keep_train);
    select(dev, dev_postings[wid], keep_dev);
  }

  std::pair<Corpus, Corpus> out;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (keep_train[i]) out.first.utterances.push_back(train.utterances[i]);
  for (std::size_t i = 0; i < dev.size(); ++i)
    if (keep_dev[i]) out.second.utterances.push_back(dev.utterances[i]);
  return out;
}

}  // namespace slotfill
