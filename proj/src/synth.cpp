#include "slotfill/synth.hpp"

#include <random>
#include <string>
#include <vector>

namespace slotfill {

namespace {

const std::vector<std::string> kFillers = {
    "please", "show", "me",   "the",  "a",    "to",   "from", "at",
    "in",     "for",  "book", "find", "list", "near", "with", "on"};

std::string concept_name(int i) {
  static const std::vector<std::string> pool = {
      "city", "time", "price", "airline", "date",
      "class", "food", "hotel", "org",    "loc"};
  if (i < int(pool.size())) return pool[std::size_t(i)];
  return "slot" + std::to_string(i);
}

// Multi-word concepts split their surface forms into begin words (used only
// as the first token of a phrase) and inside words (only as continuations),
// so the label sequence is a deterministic function of the word sequence and
// the generator's labels are a learnable oracle even for adjacent slots.
struct Concept {
  std::string name;
  bool multi = false;               // phrases of length 1..3 vs exactly 1
  std::vector<std::string> words;   // 4 surface forms; for multi: [0,1] begin, [2,3] inside
};

// A template item is either a fixed filler word or a slot for a concept.
struct Item {
  int slot = -1;  // >= 0: concept index; -1: filler
  std::string filler;
};

using Template = std::vector<Item>;

// Deterministic length-3 phrase covering begin word 0 and both inside words.
void append_phrase(Utterance& u, const Concept& c) {
  u.words.push_back(c.words[0]);
  u.labels.push_back("B-" + c.name);
  u.words.push_back(c.words[2]);
  u.labels.push_back("I-" + c.name);
  u.words.push_back(c.words[3]);
  u.labels.push_back("I-" + c.name);
}

void append_filler(Utterance& u, const std::string& word) {
  u.words.push_back(word);
  u.labels.push_back("O");
}

// Every concept word and every filler appears at least once, and every label
// (B-x, I-x for multi concepts; B-x for single ones) is produced.
std::vector<Utterance> calibration_utterances(const std::vector<Concept>& concepts) {
  std::vector<Utterance> out;
  for (const Concept& c : concepts) {
    if (c.multi) {
      Utterance u;
      append_filler(u, kFillers[0]);
      append_phrase(u, c);  // emits B-x I-x I-x with words 0, 2, 3
      append_filler(u, kFillers[1]);
      out.push_back(u);
      Utterance v;
      v.words.push_back(c.words[1]);
      v.labels.push_back("B-" + c.name);
      append_filler(v, kFillers[2]);
      out.push_back(v);
    } else {
      for (std::size_t j = 0; j < c.words.size(); ++j) {
        Utterance u;
        if (j % 2 == 0) append_filler(u, kFillers[j]);
        u.words.push_back(c.words[j]);
        u.labels.push_back("B-" + c.name);
        if (j % 2 == 1) append_filler(u, kFillers[j]);
        out.push_back(u);
      }
    }
  }
  Utterance all_fillers;
  for (const std::string& f : kFillers) append_filler(all_fillers, f);
  out.push_back(all_fillers);
  return out;
}

Utterance realize(const Template& tmpl, const std::vector<Concept>& concepts,
                  std::mt19937_64& rng) {
  Utterance u;
  for (const Item& item : tmpl) {
    if (item.slot < 0) {
      append_filler(u, item.filler);
      continue;
    }
    const Concept& c = concepts[std::size_t(item.slot)];
    if (!c.multi) {
      const int w = std::uniform_int_distribution<int>(0, 3)(rng);
      u.words.push_back(c.words[std::size_t(w)]);
      u.labels.push_back("B-" + c.name);
      continue;
    }
    const int len = std::uniform_int_distribution<int>(1, 3)(rng);
    u.words.push_back(c.words[std::size_t(std::uniform_int_distribution<int>(0, 1)(rng))]);
    u.labels.push_back("B-" + c.name);
    for (int j = 1; j < len; ++j) {
      u.words.push_back(c.words[std::size_t(std::uniform_int_distribution<int>(2, 3)(rng))]);
      u.labels.push_back("I-" + c.name);
    }
  }
  return u;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  require(cfg.n_labels >= 2, "need at least one concept (n_labels >= 2)");
  require(cfg.n_templates >= 1, "need at least one template");
  require(cfg.train_utterances >= 1, "need at least one training utterance");

  const int n_multi = (cfg.n_labels - 1) / 2;
  const int n_single = (cfg.n_labels - 1) % 2;
  std::vector<Concept> concepts;
  for (int i = 0; i < n_multi + n_single; ++i) {
    Concept c;
    c.name = concept_name(i);
    c.multi = i < n_multi;
    for (int j = 0; j < 4; ++j)
      c.words.push_back(c.name + std::to_string(j));
    concepts.push_back(c);
  }

  std::mt19937_64 rng(cfg.seed);

  std::vector<Template> templates(std::size_t(cfg.n_templates));
  std::uniform_int_distribution<int> length_dist(3, 8);
  std::uniform_int_distribution<int> concept_dist(0, int(concepts.size()) - 1);
  std::uniform_int_distribution<int> filler_dist(0, int(kFillers.size()) - 1);
  std::bernoulli_distribution is_slot(0.4);
  for (Template& t : templates) {
    const int len = length_dist(rng);
    bool has_slot = false;
    for (int p = 0; p < len; ++p) {
      Item item;
      if (is_slot(rng)) {
        item.slot = concept_dist(rng);
        has_slot = true;
      } else {
        item.filler = kFillers[std::size_t(filler_dist(rng))];
      }
      t.push_back(item);
    }
    if (!has_slot) {
      t[0].slot = concept_dist(rng);
      t[0].filler.clear();
    }
  }
  // Guarantee every concept is reachable from some template.
  std::vector<bool> used(concepts.size(), false);
  for (const Template& t : templates)
    for (const Item& item : t)
      if (item.slot >= 0) used[std::size_t(item.slot)] = true;
  for (std::size_t c = 0; c < concepts.size(); ++c) {
    if (used[c]) continue;
    Item item;
    item.slot = int(c);
    templates[c % templates.size()].push_back(item);
  }

  std::uniform_int_distribution<int> template_dist(0, cfg.n_templates - 1);
  auto draw = [&](int count, std::vector<Utterance> head) {
    Corpus corpus;
    corpus.utterances = std::move(head);
    if (int(corpus.utterances.size()) > count) corpus.utterances.resize(std::size_t(count));
    while (int(corpus.utterances.size()) < count) {
      const Template& t = templates[std::size_t(template_dist(rng))];
      corpus.utterances.push_back(realize(t, concepts, rng));
    }
    return corpus;
  };

  const std::vector<Utterance> calibration = calibration_utterances(concepts);
  require(int(calibration.size()) <= cfg.train_utterances,
          "train split too small to cover all concept words (needs >= " +
              std::to_string(calibration.size()) + ")");

  SynthCorpus out;
  out.train = draw(cfg.train_utterances, calibration);
  out.dev = draw(cfg.dev_utterances, {});
  out.test = draw(cfg.test_utterances, {});
  return out;
}

}  // namespace slotfill
