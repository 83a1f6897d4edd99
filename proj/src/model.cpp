#include "slotfill/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace slotfill {

std::string feature_mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::baseline: return "bl";
    case FeatureMode::plain: return "le-plain";
    case FeatureMode::windowed: return "le-window";
  }
  throw Error("unknown feature mode");
}

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "bl") return FeatureMode::baseline;
  if (s == "le-plain") return FeatureMode::plain;
  if (s == "le-window") return FeatureMode::windowed;
  throw Error("unknown mode '" + s + "' (expected bl, le-plain or le-window)");
}

std::string loss_mode_name(LossMode m) {
  return m == LossMode::crf ? "crf" : "softmax";
}

LossMode parse_loss_mode(const std::string& s) {
  if (s == "crf") return LossMode::crf;
  if (s == "softmax") return LossMode::softmax;
  throw Error("unknown loss '" + s + "' (expected crf or softmax)");
}

namespace {

void check_config(const ModelConfig& c) {
  require(c.n_words > 0, "model needs at least one word");
  require(c.n_labels > 0, "model needs at least one label");
  require(c.embed_dim > 0 && c.hidden_dim > 0, "dimensions must be positive");
  if (c.mode == FeatureMode::windowed) {
    require(c.half_window >= 0, "half window must be >= 0");
    require(c.pool_stride >= 1, "pool stride must be >= 1");
  }
}

// Deterministic element order regardless of Eigen's storage layout.
template <typename Dist>
void fill(Matd& m, Dist& dist, std::mt19937_64& rng) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
}

template <typename Dist>
void fill(Vecd& v, Dist& dist, std::mt19937_64& rng) {
  for (Index i = 0; i < v.size(); ++i) v(i) = dist(rng);
}

void glorot(Matd& m, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / double(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  fill(m, dist, rng);
}

void init_gru(GruParams<double>& p, std::mt19937_64& rng) {
  glorot(p.in_update, rng);
  glorot(p.in_reset, rng);
  glorot(p.in_cand, rng);
  glorot(p.rec_update, rng);
  glorot(p.rec_reset, rng);
  glorot(p.rec_cand, rng);
}

}  // namespace

Index Model::feature_width() const {
  switch (cfg.mode) {
    case FeatureMode::baseline: return 0;
    case FeatureMode::plain: return cfg.n_labels;
    case FeatureMode::windowed: return pooled_width(cfg.n_labels, cfg.pool_stride);
  }
  throw Error("unknown feature mode");
}

Model Model::zeros_like() const {
  Model z;
  z.cfg = cfg;
  z.assoc = assoc;
  z.embeddings.setZero(cfg.n_words, cfg.embed_dim);
  if (cfg.mode != FeatureMode::baseline) {
    z.label_scale.setZero(cfg.n_labels);
    z.word_scale.setZero(cfg.n_words);
  }
  if (cfg.mode == FeatureMode::windowed)
    z.window_weights.setZero(2 * cfg.half_window + 1);
  z.gru_fwd.setZero(cfg.embed_dim, cfg.hidden_dim);
  z.gru_bwd.setZero(cfg.embed_dim, cfg.hidden_dim);
  z.fc.setZero(z.fc_input_dim(), cfg.n_labels);
  if (cfg.loss == LossMode::crf) z.crf.setZero(cfg.n_labels);
  return z;
}

void Model::set_zero() {
  for (TensorRef t : tensors())
    std::memset(t.data, 0, std::size_t(t.size()) * sizeof(double));
}

Model Model::create(const ModelConfig& cfg, const Matd* assoc,
                    std::mt19937_64& rng) {
  check_config(cfg);
  Model shape;
  shape.cfg = cfg;
  if (cfg.mode != FeatureMode::baseline) {
    require(assoc != nullptr,
            "label-embedding modes need a word-label association matrix");
    require(assoc->rows() == cfg.n_labels && assoc->cols() == cfg.n_words,
            "association matrix shape mismatch");
    shape.assoc = *assoc;
  }
  Model m = shape.zeros_like();

  std::normal_distribution<double> emb_dist(0.0, 0.1);
  fill(m.embeddings, emb_dist, rng);
  if (cfg.mode != FeatureMode::baseline) {
    m.label_scale.setOnes();
    m.word_scale.setOnes();
  }
  if (cfg.mode == FeatureMode::windowed) {
    std::uniform_real_distribution<double> wd(0.0, 0.2);
    fill(m.window_weights, wd, rng);
  }
  init_gru(m.gru_fwd, rng);
  init_gru(m.gru_bwd, rng);
  glorot(m.fc.weight, rng);
  // biases and CRF potentials start at zero
  return m;
}

std::vector<TensorRef> Model::tensors() {
  std::vector<TensorRef> out;
  auto add = [&](const std::string& name, Matd& m) {
    out.push_back({name, m.data(), m.rows(), m.cols()});
  };
  auto addv = [&](const std::string& name, Vecd& v) {
    out.push_back({name, v.data(), v.size(), 1});
  };
  add("embeddings", embeddings);
  if (cfg.mode != FeatureMode::baseline) {
    addv("label_scale", label_scale);
    addv("word_scale", word_scale);
  }
  if (cfg.mode == FeatureMode::windowed) addv("window_weights", window_weights);
  auto add_gru = [&](const std::string& prefix, GruParams<double>& g) {
    add(prefix + ".in_update", g.in_update);
    add(prefix + ".in_reset", g.in_reset);
    add(prefix + ".in_cand", g.in_cand);
    add(prefix + ".rec_update", g.rec_update);
    add(prefix + ".rec_reset", g.rec_reset);
    add(prefix + ".rec_cand", g.rec_cand);
    addv(prefix + ".b_update", g.b_update);
    addv(prefix + ".b_reset", g.b_reset);
    addv(prefix + ".b_cand", g.b_cand);
  };
  add_gru("gru_fwd", gru_fwd);
  add_gru("gru_bwd", gru_bwd);
  add("fc.weight", fc.weight);
  addv("fc.bias", fc.bias);
  if (cfg.loss == LossMode::crf) {
    add("crf.transitions", crf.transitions);
    addv("crf.start", crf.start);
    addv("crf.end", crf.end);
  }
  return out;
}

long Model::parameter_count() const {
  long total = 0;
  for (TensorRef t : const_cast<Model*>(this)->tensors()) total += t.size();
  return total;
}

Matd Model::forward(const std::vector<int>& word_ids, std::size_t len,
                    const DropoutMasks* masks, ModelTape* tape) const {
  require(len >= 1, "cannot run the tagger on an empty utterance");
  require(word_ids.size() >= len, "utterance shorter than requested length");
  const Index k = Index(len), d = cfg.embed_dim;

  Matd inputs(k, d);
  for (Index i = 0; i < k; ++i) {
    const int w = word_ids[std::size_t(i)];
    require(w >= 0 && w < cfg.n_words, "word id out of range");
    inputs.row(i) = embeddings.row(w);
  }

  const Vecd* fm = (masks && masks->active) ? &masks->fwd : nullptr;
  const Vecd* bm = (masks && masks->active) ? &masks->bwd : nullptr;
  Matd gru_out =
      bigru_forward(inputs, gru_fwd, gru_bwd, fm, bm, tape ? &tape->gru : nullptr);

  Matd label_vecs, plain, features;
  if (cfg.mode != FeatureMode::baseline) {
    label_vecs = label_embeddings(assoc, embeddings, label_scale, word_scale);
    plain = plain_distances(inputs, label_vecs, &degenerate_distances);
    if (cfg.mode == FeatureMode::plain) {
      features = plain;
    } else {
      features = windowed_distances(plain, window_weights, cfg.half_window,
                                    cfg.pool_stride, tape ? &tape->window : nullptr);
    }
  }

  Matd concat(k, fc_input_dim());
  concat.leftCols(2 * cfg.hidden_dim) = gru_out;
  if (feature_width() > 0) concat.rightCols(feature_width()) = features;
  Matd emissions =
      dense_forward(concat, fc, Activation::none, tape ? &tape->fc : nullptr);

  if (tape) {
    tape->word_ids.assign(word_ids.begin(), word_ids.begin() + std::ptrdiff_t(len));
    tape->inputs = inputs;
    tape->gru_out = gru_out;
    tape->label_vecs = label_vecs;
    tape->plain = plain;
    tape->features = features;
    tape->concat = concat;
    tape->emissions = emissions;
  }
  return emissions;
}

double Model::loss(const Matd& emissions, const std::vector<int>& label_ids) const {
  const Index k = emissions.rows();
  require(Index(label_ids.size()) >= k, "label sequence shorter than emissions");
  std::vector<int> labels(label_ids.begin(), label_ids.begin() + k);
  for (int y : labels) require(y >= 0 && y < cfg.n_labels, "label id out of range");
  if (cfg.loss == LossMode::crf) return crf_sequence_nll(emissions, labels, crf);
  return softmax_nll<double>(emissions, labels, 0.0, nullptr);
}

double Model::backward(const ModelTape& tape, const std::vector<int>& label_ids,
                       double scale, Model& grads) const {
  const Index k = tape.emissions.rows(), m = cfg.n_labels;
  require(Index(label_ids.size()) >= k, "label sequence shorter than emissions");
  std::vector<int> labels(label_ids.begin(), label_ids.begin() + k);
  for (int y : labels) require(y >= 0 && y < m, "label id out of range");

  Matd d_emissions = Matd::Zero(k, m);
  double nll;
  if (cfg.loss == LossMode::crf) {
    nll = crf_nll_backward(tape.emissions, labels, crf, scale, d_emissions,
                           grads.crf);
  } else {
    nll = softmax_nll(tape.emissions, labels, scale, &d_emissions);
  }

  Matd d_concat = Matd::Zero(k, fc_input_dim());
  dense_backward(fc, tape.fc, Activation::none, d_emissions, grads.fc, d_concat);

  Matd d_inputs = Matd::Zero(k, cfg.embed_dim);
  if (cfg.mode != FeatureMode::baseline) {
    Matd d_plain = Matd::Zero(k, m);
    if (cfg.mode == FeatureMode::windowed) {
      Matd d_features = d_concat.rightCols(feature_width());
      windowed_distances_backward(tape.plain, window_weights, cfg.half_window,
                                  cfg.pool_stride, tape.window, d_features,
                                  d_plain, grads.window_weights);
    } else {
      d_plain = d_concat.rightCols(m);
    }
    Matd d_label_vecs = Matd::Zero(m, cfg.embed_dim);
    plain_distances_backward(tape.inputs, tape.label_vecs, d_plain, d_inputs,
                             d_label_vecs);
    label_embeddings_backward(assoc, embeddings, label_scale, word_scale,
                              d_label_vecs, grads.embeddings, grads.label_scale,
                              grads.word_scale);
  }

  Matd d_gru_out = d_concat.leftCols(2 * cfg.hidden_dim);
  bigru_backward(gru_fwd, gru_bwd, tape.gru, d_gru_out, grads.gru_fwd,
                 grads.gru_bwd, d_inputs);
  for (Index i = 0; i < k; ++i)
    grads.embeddings.row(tape.word_ids[std::size_t(i)]) += d_inputs.row(i);
  return nll;
}

std::vector<int> Model::predict(const std::vector<int>& word_ids,
                                std::size_t len) const {
  Matd emissions = forward(word_ids, len);
  if (cfg.loss == LossMode::crf) return crf_viterbi(emissions, crf).first;
  std::vector<int> out(len);
  for (Index t = 0; t < emissions.rows(); ++t) {
    Index best;
    emissions.row(t).maxCoeff(&best);
    out[std::size_t(t)] = int(best);
  }
  return out;
}

double regularization_penalty(const Model& m, double l2, bool include_window) {
  if (l2 == 0.0 || m.cfg.mode == FeatureMode::baseline) return 0.0;
  double p = m.label_scale.squaredNorm() + m.word_scale.squaredNorm();
  if (include_window && m.cfg.mode == FeatureMode::windowed)
    p += m.window_weights.squaredNorm();
  return l2 * p;
}

void add_regularization_gradient(const Model& m, double l2, bool include_window,
                                 Model& grads) {
  if (l2 == 0.0 || m.cfg.mode == FeatureMode::baseline) return;
  grads.label_scale += 2.0 * l2 * m.label_scale;
  grads.word_scale += 2.0 * l2 * m.word_scale;
  if (include_window && m.cfg.mode == FeatureMode::windowed)
    grads.window_weights += 2.0 * l2 * m.window_weights;
}

// --- checkpoint I/O ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'L', 'F', 'L', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, std::uint32_t(s.size()));
  os.write(s.data(), std::streamsize(s.size()));
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

std::string get_str(std::istream& is) {
  std::uint32_t n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), std::streamsize(n));
  return s;
}

void put_mat(std::ostream& os, const Matd& m) {
  put_u64(os, std::uint64_t(m.rows()));
  put_u64(os, std::uint64_t(m.cols()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) put_f64(os, m(r, c));
}

Matd get_mat(std::istream& is) {
  const Index rows = Index(get_u64(is)), cols = Index(get_u64(is));
  Matd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = get_f64(is);
  return m;
}

}  // namespace

void Model::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  require(bool(os), "cannot open checkpoint for writing: " + path);
  os.write(kMagic, 8);
  put_u32(os, kVersion);
  put_u32(os, std::uint32_t(cfg.n_words));
  put_u32(os, std::uint32_t(cfg.n_labels));
  put_u32(os, std::uint32_t(cfg.embed_dim));
  put_u32(os, std::uint32_t(cfg.hidden_dim));
  put_u32(os, std::uint32_t(cfg.half_window));
  put_u32(os, std::uint32_t(cfg.pool_stride));
  put_str(os, feature_mode_name(cfg.mode));
  put_str(os, loss_mode_name(cfg.loss));
  put_u32(os, cfg.mode != FeatureMode::baseline ? 1u : 0u);
  if (cfg.mode != FeatureMode::baseline) put_mat(os, assoc);

  auto named = const_cast<Model*>(this)->tensors();
  put_u32(os, std::uint32_t(named.size()));
  for (const TensorRef& t : named) {
    put_str(os, t.name);
    put_u64(os, std::uint64_t(t.rows));
    put_u64(os, std::uint64_t(t.cols));
    for (Index i = 0; i < t.size(); ++i) put_f64(os, t.data[i]);
  }
  require(bool(os), "error while writing checkpoint: " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  require(bool(is) && std::memcmp(magic, kMagic, 8) == 0,
          "not a model checkpoint: " + path);
  require(get_u32(is) == kVersion, "unsupported checkpoint version in " + path);

  ModelConfig cfg;
  cfg.n_words = int(get_u32(is));
  cfg.n_labels = int(get_u32(is));
  cfg.embed_dim = int(get_u32(is));
  cfg.hidden_dim = int(get_u32(is));
  cfg.half_window = int(get_u32(is));
  cfg.pool_stride = int(get_u32(is));
  cfg.mode = parse_feature_mode(get_str(is));
  cfg.loss = parse_loss_mode(get_str(is));
  check_config(cfg);

  Model m;
  m.cfg = cfg;
  m = m.zeros_like();
  if (get_u32(is) != 0) {
    m.assoc = get_mat(is);
    require(m.assoc.rows() == cfg.n_labels && m.assoc.cols() == cfg.n_words,
            "checkpoint association matrix shape mismatch");
  }

  const std::uint32_t count = get_u32(is);
  auto named = m.tensors();
  require(count == named.size(), "checkpoint tensor count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = get_str(is);
    require(name == named[i].name,
            "unexpected tensor '" + name + "' in checkpoint");
    const Index rows = Index(get_u64(is)), cols = Index(get_u64(is));
    require(rows == named[i].rows && cols == named[i].cols,
            "tensor shape mismatch for '" + name + "'");
    for (Index j = 0; j < named[i].size(); ++j) named[i].data[j] = get_f64(is);
  }
  require(bool(is), "truncated checkpoint: " + path);
  return m;
}

}  // namespace slotfill
