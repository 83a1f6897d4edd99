#ifndef SLOTFILL_MODEL_HPP
#define SLOTFILL_MODEL_HPP

#include <random>
#include <string>
#include <vector>

#include "slotfill/cooccurrence.hpp"
#include "slotfill/crf.hpp"
#include "slotfill/dense.hpp"
#include "slotfill/gru.hpp"
#include "slotfill/label_space.hpp"
#include "slotfill/types.hpp"

namespace slotfill {

// Which features are concatenated with the Bi-GRU output before the FC
// projection: none (baseline), per-label cosine distances, or the
// context-windowed pooled variant.
enum class FeatureMode { baseline, plain, windowed };
enum class LossMode { crf, softmax };

std::string feature_mode_name(FeatureMode m);
FeatureMode parse_feature_mode(const std::string& s);
std::string loss_mode_name(LossMode m);
LossMode parse_loss_mode(const std::string& s);

struct ModelConfig {
  int n_words = 0;
  int n_labels = 0;
  int embed_dim = 300;
  int hidden_dim = 60;
  int half_window = 2;
  int pool_stride = 10;
  FeatureMode mode = FeatureMode::baseline;
  LossMode loss = LossMode::crf;
};

// Named view over one trainable tensor; shapes are fixed by the config so a
// flat pointer + extent is enough for optimizers, checkpoints and checks.
struct TensorRef {
  std::string name;
  double* data;
  Index rows, cols;
  Index size() const { return rows * cols; }
};

struct DropoutMasks {
  Vecd fwd, bwd;  // one mask per direction, held fixed across timesteps
  bool active = false;
};

struct ModelTape {
  std::vector<int> word_ids;  // effective positions only
  Matd inputs;                // k x d
  BiGruTape<double> gru;
  Matd gru_out;               // k x 2h
  Matd label_vecs;            // m x d (LE modes)
  Matd plain;                 // k x m (LE modes)
  WindowTape<double> window;  // windowed mode
  Matd features;              // k x feature_width
  Matd concat;                // k x fc input
  DenseTape<double> fc;
  Matd emissions;             // k x m
};

// The tagger: word embeddings -> Bi-GRU -> [optional distance features
// concatenated per position] -> FC -> CRF. In LE modes the label vectors are
// recomputed from the association matrix on every forward pass, so word and
// label vectors share parameters.
class Model {
 public:
  Model() = default;  // empty shell; build via create(), load() or zeros_like()

  ModelConfig cfg;

  Matd embeddings;       // n x d
  Vecd label_scale;      // m (LE modes only)
  Vecd word_scale;       // n (LE modes only)
  Vecd window_weights;   // 2q+1 (windowed mode only)
  GruParams<double> gru_fwd, gru_bwd;
  DenseParams<double> fc;
  CrfParams<double> crf;  // unused tensors stay empty in softmax mode
  Matd assoc;             // m x n, finalized co-occurrence values (LE modes)

  static Model create(const ModelConfig& cfg, const Matd* assoc,
                      std::mt19937_64& rng);
  Model zeros_like() const;
  void set_zero();

  Index feature_width() const;
  Index fc_input_dim() const { return 2 * cfg.hidden_dim + feature_width(); }
  std::vector<TensorRef> tensors();  // fixed order, names stable
  long parameter_count() const;

  // Forward over the first `len` entries of word_ids; returns pre-CRF
  // emission scores (len x m). Mutable diagnostic: degenerate_distances.
  Matd forward(const std::vector<int>& word_ids, std::size_t len,
               const DropoutMasks* masks = nullptr,
               ModelTape* tape = nullptr) const;
  double loss(const Matd& emissions, const std::vector<int>& label_ids) const;
  // Backward from the loss on a taped forward; accumulates scale * d/d theta
  // into `grads`. Returns the (unscaled) loss.
  double backward(const ModelTape& tape, const std::vector<int>& label_ids,
                  double scale, Model& grads) const;

  std::vector<int> predict(const std::vector<int>& word_ids,
                           std::size_t len) const;

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  mutable long degenerate_distances = 0;
};

// L2 penalty on the two label-space scaling vectors (optionally the window
// weights as well) and its gradient contribution.
double regularization_penalty(const Model& m, double l2, bool include_window);
void add_regularization_gradient(const Model& m, double l2, bool include_window,
                                 Model& grads);

}  // namespace slotfill

#endif  // SLOTFILL_MODEL_HPP
