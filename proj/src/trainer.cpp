#include "slotfill/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "slotfill/evaluation.hpp"
#include "slotfill/optimizer.hpp"

namespace slotfill {

int TrainConfig::half_window() const {
  require(window >= 1 && window % 2 == 1,
          "context window must be odd (total width 2q+1)");
  return (window - 1) / 2;
}

void TrainConfig::validate() const {
  require(batch_size >= 1, "batch_size must be >= 1");
  require(lr > 0.0, "lr must be positive");
  require(epochs >= 1, "epochs must be >= 1");
  require(patience >= 1, "patience must be >= 1");
  require(l2_reg >= 0.0, "l2_reg must be >= 0");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(gru_units >= 1 && embed_dim >= 1, "dimensions must be positive");
  require(pool_stride >= 1, "pool_stride must be >= 1");
  (void)half_window();
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  require(bool(is), "cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const std::size_t eq = line.find('=');
    require(eq != std::string::npos, path + ":" + std::to_string(line_no) +
                                         ": expected key=value");
    auto trim = [](std::string s) {
      const std::size_t b = s.find_first_not_of(" \t");
      const std::size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), path + ":" + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos;
    const int x = std::stoi(v, &pos);
    require(pos == v.size(), "");
    return x;
  } catch (...) {
    throw Error("config option '" + key + "' expects an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos;
    const double x = std::stod(v, &pos);
    require(pos == v.size(), "");
    return x;
  } catch (...) {
    throw Error("config option '" + key + "' expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config option '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

void apply_option(TrainConfig& cfg, const std::string& key,
                  const std::string& value) {
  if (key == "batch_size") cfg.batch_size = to_int(key, value);
  else if (key == "lr") cfg.lr = to_double(key, value);
  else if (key == "epochs") cfg.epochs = to_int(key, value);
  else if (key == "patience") cfg.patience = to_int(key, value);
  else if (key == "l2_reg") cfg.l2_reg = to_double(key, value);
  else if (key == "reg_window") cfg.reg_window = to_bool(key, value);
  else if (key == "dropout") cfg.dropout = to_double(key, value);
  else if (key == "gru_units") cfg.gru_units = to_int(key, value);
  else if (key == "embed_dim") cfg.embed_dim = to_int(key, value);
  else if (key == "window") cfg.window = to_int(key, value);
  else if (key == "pool_stride") cfg.pool_stride = to_int(key, value);
  else if (key == "mode") cfg.mode = parse_feature_mode(value);
  else if (key == "loss") cfg.loss = parse_loss_mode(value);
  else if (key == "seed") cfg.seed = std::uint64_t(std::stoull(value));
  else if (key == "min_improvement") cfg.min_improvement = to_double(key, value);
  else throw Error("unknown config option '" + key + "'");
}

Model assemble_model(const TrainConfig& cfg, const Vocab& vocab,
                     const CooccurrenceMatrix* cooc) {
  cfg.validate();
  ModelConfig mc;
  mc.n_words = vocab.n_words();
  mc.n_labels = vocab.n_labels();
  mc.embed_dim = cfg.embed_dim;
  mc.hidden_dim = cfg.gru_units;
  mc.half_window = cfg.half_window();
  mc.pool_stride = cfg.pool_stride;
  mc.mode = cfg.mode;
  mc.loss = cfg.loss;
  std::mt19937_64 rng(cfg.seed);
  if (cfg.mode == FeatureMode::baseline) return Model::create(mc, nullptr, rng);
  require(cooc != nullptr && cooc->finalized(),
          "label-embedding modes need a finalized co-occurrence matrix");
  return Model::create(mc, &cooc->values(), rng);
}

std::vector<std::vector<std::string>> predict_corpus(const Model& model,
                                                     const Corpus& corpus,
                                                     const Vocab& vocab) {
  std::vector<std::vector<std::string>> out;
  out.reserve(corpus.size());
  for (const Utterance& u : corpus.utterances) {
    const std::vector<int> ids = vocab.encode_words(u);
    out.push_back(vocab.decode_labels(model.predict(ids, ids.size())));
  }
  return out;
}

namespace {

DropoutMasks draw_masks(double dropout, int h, std::mt19937_64& rng) {
  DropoutMasks masks;
  if (dropout <= 0.0) return masks;
  const double keep = 1.0 - dropout;
  std::bernoulli_distribution coin(keep);
  masks.fwd.resize(h);
  masks.bwd.resize(h);
  for (Index i = 0; i < h; ++i) masks.fwd(i) = coin(rng) ? 1.0 / keep : 0.0;
  for (Index i = 0; i < h; ++i) masks.bwd(i) = coin(rng) ? 1.0 / keep : 0.0;
  masks.active = true;
  return masks;
}

}  // namespace

TrainResult train(Model model, const Corpus& train_corpus,
                  const Corpus& dev_corpus, const Vocab& vocab,
                  const TrainConfig& cfg, std::ostream* log_stream) {
  cfg.validate();
  require(train_corpus.labeled(), "training corpus must be labeled");
  require(dev_corpus.labeled(), "dev corpus must be labeled");
  require(train_corpus.size() > 0, "training corpus is empty");

  const std::size_t n_train = train_corpus.size();
  std::vector<std::vector<int>> words(n_train), labels(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    const Utterance& u = train_corpus.utterances[i];
    require(u.size() > 0, "empty utterance in training corpus");
    words[i] = vocab.encode_words(u);
    labels[i] = vocab.encode_labels(u);
  }

  // Length-bucketed batches: stable composition, shuffled order per epoch.
  std::vector<std::size_t> by_length(n_train);
  std::iota(by_length.begin(), by_length.end(), 0);
  std::stable_sort(by_length.begin(), by_length.end(),
                   [&](std::size_t a, std::size_t b) {
                     return words[a].size() < words[b].size();
                   });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n_train; i += std::size_t(cfg.batch_size)) {
    const std::size_t end = std::min(n_train, i + std::size_t(cfg.batch_size));
    batches.emplace_back(by_length.begin() + std::ptrdiff_t(i),
                         by_length.begin() + std::ptrdiff_t(end));
  }

  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
  Nadam optimizer(model);
  PlateauSchedule schedule(cfg.lr, cfg.patience, cfg.min_improvement);
  Model grads = model.zeros_like();

  TrainResult result;
  result.model = model;
  result.best_dev_f1 = -1.0;

  std::vector<std::size_t> batch_order(batches.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < batch_order.size(); ++bi) {
      const std::vector<std::size_t>& batch = batches[batch_order[bi]];
      const double scale = 1.0 / double(batch.size());
      grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t idx : batch) {
        const DropoutMasks masks =
            draw_masks(cfg.dropout, cfg.gru_units, rng);
        ModelTape tape;
        model.forward(words[idx], words[idx].size(),
                      masks.active ? &masks : nullptr, &tape);
        batch_loss += model.backward(tape, labels[idx], scale, grads);
      }
      if (!std::isfinite(batch_loss))
        throw Error("training diverged: non-finite loss in batch " +
                    std::to_string(batch_order[bi]) + " of epoch " +
                    std::to_string(epoch));
      add_regularization_gradient(model, cfg.l2_reg, cfg.reg_window, grads);
      optimizer.step(model, grads, schedule.lr());
      loss_sum += batch_loss;
    }

    const auto dev_pred = predict_corpus(model, dev_corpus, vocab);
    const double dev_f1 = conll_f1(dev_corpus, dev_pred).f1();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(n_train);
    rec.dev_f1 = dev_f1;
    rec.lr = schedule.lr();
    result.log.push_back(rec);
    if (log_stream) {
      nlohmann::json j{{"epoch", rec.epoch},
                       {"train_loss", rec.train_loss},
                       {"dev_f1", rec.dev_f1},
                       {"lr", rec.lr}};
      (*log_stream) << j.dump() << '\n';
    }

    if (dev_f1 > result.best_dev_f1 + cfg.min_improvement ||
        result.best_epoch == 0) {
      result.best_dev_f1 = dev_f1;
      result.best_epoch = epoch;
      result.model = model;
    }
    schedule.observe(dev_f1);
  }

  result.degenerate_distances = model.degenerate_distances;
  return result;
}

}  // namespace slotfill
