#ifndef SLOTFILL_SYNTH_HPP
#define SLOTFILL_SYNTH_HPP

#include <cstdint>

#include "slotfill/corpus.hpp"

namespace slotfill {

// Template-grammar generator for desk-scale labeled corpora. The requested
// label count is hit exactly: (n_labels-1)/2 multi-word concepts (B-x and
// I-x), one single-word concept when n_labels is even, plus O. Deterministic
// calibration utterances at the head of the train split cover every concept
// word and label, so the generator's own labels can serve as an oracle.
struct SynthConfig {
  int n_templates = 10;
  int train_utterances = 200;
  int dev_utterances = 50;
  int test_utterances = 50;
  int n_labels = 8;
  std::uint64_t seed = 1;
};

struct SynthCorpus {
  Corpus train, dev, test;
};

SynthCorpus generate_synthetic(const SynthConfig& cfg);

}  // namespace slotfill

#endif  // SLOTFILL_SYNTH_HPP
