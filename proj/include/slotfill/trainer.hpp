#ifndef SLOTFILL_TRAINER_HPP
#define SLOTFILL_TRAINER_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "slotfill/cooccurrence.hpp"
#include "slotfill/corpus.hpp"
#include "slotfill/model.hpp"

namespace slotfill {

struct TrainConfig {
  int batch_size = 32;
  double lr = 0.004;
  int epochs = 30;
  int patience = 3;        // epochs without dev improvement before LR halves
  double l2_reg = 1e-6;    // on the label/word scaling vectors
  bool reg_window = false; // extend the penalty to the window weights
  double dropout = 0.5;    // recurrent dropout rate (0 disables)
  int gru_units = 60;
  int embed_dim = 300;
  int window = 5;          // total context width 2q+1, odd
  int pool_stride = 10;
  FeatureMode mode = FeatureMode::baseline;
  LossMode loss = LossMode::crf;
  std::uint64_t seed = 1;
  double min_improvement = 1e-6;

  int half_window() const;
  void validate() const;
};

// Flat key=value config text; '#' starts a comment. Unknown keys error.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_option(TrainConfig& cfg, const std::string& key,
                  const std::string& value);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_f1 = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Model model;  // parameters of the best dev-F1 epoch
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::vector<EpochRecord> log;
  long degenerate_distances = 0;
};

Model assemble_model(const TrainConfig& cfg, const Vocab& vocab,
                     const CooccurrenceMatrix* cooc);

// Length-bucketed mini-batch training with Nadam and plateau LR halving.
// Per-epoch records go to `log_stream` (one JSON object per line) when given.
TrainResult train(Model model, const Corpus& train_corpus,
                  const Corpus& dev_corpus, const Vocab& vocab,
                  const TrainConfig& cfg, std::ostream* log_stream = nullptr);

// Viterbi decoding of a whole corpus back to label strings.
std::vector<std::vector<std::string>> predict_corpus(const Model& model,
                                                     const Corpus& corpus,
                                                     const Vocab& vocab);

}  // namespace slotfill

#endif  // SLOTFILL_TRAINER_HPP
