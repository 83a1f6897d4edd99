#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <sstream>

#include "helpers.hpp"
#include "slotfill/evaluation.hpp"
#include "slotfill/synth.hpp"
#include "slotfill/trainer.hpp"

using namespace slotfill;

namespace {

// Shared desk-scale corpus: deterministic, learnable by construction.
const SynthCorpus& fixture() {
  static const SynthCorpus data = [] {
    SynthConfig cfg;
    cfg.n_labels = 5;
    cfg.train_utterances = 60;
    cfg.dev_utterances = 15;
    cfg.test_utterances = 15;
    cfg.seed = 7;
    return generate_synthetic(cfg);
  }();
  return data;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.lr = 0.02;
  cfg.epochs = 2;
  cfg.patience = 3;
  cfg.dropout = 0.2;
  cfg.gru_units = 8;
  cfg.embed_dim = 8;
  cfg.window = 3;
  cfg.pool_stride = 2;
  cfg.seed = 5;
  return cfg;
}

CooccurrenceMatrix finalized_cooc(const Corpus& train, const Vocab& vocab) {
  CooccurrenceMatrix cooc(vocab.n_labels(), vocab.n_words());
  cooc.count(train, vocab);
  cooc.finalize();
  return cooc;
}

}  // namespace

TEST_CASE("config files are parsed with comments and whitespace stripped") {
  testutil::TempDir dir;
  const std::string path = dir.file("train.cfg");
  testutil::write_file(path,
                       "# full-line comment\n"
                       "batch_size = 16   # trailing comment\n"
                       "lr=0.01\n"
                       "\t \n"
                       "  mode =  le-window\t\n");
  auto kv = read_config_file(path);
  REQUIRE(kv.size() == 3);
  CHECK(kv.at("batch_size") == "16");
  CHECK(kv.at("lr") == "0.01");
  CHECK(kv.at("mode") == "le-window");

  const std::string bad = dir.file("bad.cfg");
  testutil::write_file(bad, "lr = 0.1\nnot a pair\n");
  try {
    read_config_file(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  testutil::write_file(bad, " = 3\n");
  CHECK_THROWS_AS(read_config_file(bad), Error);
  CHECK_THROWS_AS(read_config_file(dir.file("missing.cfg")), Error);
}

TEST_CASE("apply_option covers every key and rejects the rest") {
  TrainConfig cfg;
  apply_option(cfg, "batch_size", "7");
  apply_option(cfg, "lr", "0.125");
  apply_option(cfg, "epochs", "9");
  apply_option(cfg, "patience", "4");
  apply_option(cfg, "l2_reg", "1e-4");
  apply_option(cfg, "reg_window", "true");
  apply_option(cfg, "dropout", "0.25");
  apply_option(cfg, "gru_units", "12");
  apply_option(cfg, "embed_dim", "24");
  apply_option(cfg, "window", "7");
  apply_option(cfg, "pool_stride", "3");
  apply_option(cfg, "mode", "le-plain");
  apply_option(cfg, "loss", "softmax");
  apply_option(cfg, "seed", "99");
  apply_option(cfg, "min_improvement", "0.001");

  CHECK(cfg.batch_size == 7);
  CHECK(cfg.lr == 0.125);
  CHECK(cfg.epochs == 9);
  CHECK(cfg.patience == 4);
  CHECK(cfg.l2_reg == 1e-4);
  CHECK(cfg.reg_window);
  CHECK(cfg.dropout == 0.25);
  CHECK(cfg.gru_units == 12);
  CHECK(cfg.embed_dim == 24);
  CHECK(cfg.window == 7);
  CHECK(cfg.half_window() == 3);
  CHECK(cfg.pool_stride == 3);
  CHECK(cfg.mode == FeatureMode::plain);
  CHECK(cfg.loss == LossMode::softmax);
  CHECK(cfg.seed == 99);
  CHECK(cfg.min_improvement == 0.001);

  CHECK_THROWS_AS(apply_option(cfg, "learning_rate", "0.1"), Error);
  try {
    apply_option(cfg, "epochs", "many");
    FAIL("expected a type error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("integer") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_option(cfg, "lr", "fast"), Error);
  CHECK_THROWS_AS(apply_option(cfg, "reg_window", "maybe"), Error);
  CHECK_THROWS_AS(apply_option(cfg, "batch_size", "3.5"), Error);
}

TEST_CASE("validate rejects out-of-range settings") {
  auto broken = [](auto&& tweak) {
    TrainConfig cfg;
    tweak(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.batch_size = 0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.lr = 0.0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.epochs = 0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.patience = 0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.l2_reg = -1.0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.dropout = 1.0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.dropout = -0.1; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.gru_units = 0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.pool_stride = 0; }).validate(), Error);
  CHECK_THROWS_AS(broken([](TrainConfig& c) { c.window = 4; }).validate(), Error);
  CHECK_NOTHROW(TrainConfig().validate());
  TrainConfig one;
  one.window = 1;
  CHECK(one.half_window() == 0);
}

TEST_CASE("assemble_model takes its shape from the vocabulary") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();

  Model bl = assemble_model(cfg, vocab, nullptr);
  CHECK(bl.cfg.n_words == vocab.n_words());
  CHECK(bl.cfg.n_labels == vocab.n_labels());
  CHECK(bl.cfg.embed_dim == cfg.embed_dim);
  CHECK(bl.cfg.hidden_dim == cfg.gru_units);
  CHECK(bl.cfg.mode == FeatureMode::baseline);

  cfg.mode = FeatureMode::windowed;
  CHECK_THROWS_AS(assemble_model(cfg, vocab, nullptr), Error);
  CooccurrenceMatrix raw(vocab.n_labels(), vocab.n_words());
  CHECK_THROWS_AS(assemble_model(cfg, vocab, &raw), Error);  // not finalized

  const CooccurrenceMatrix cooc = finalized_cooc(data.train, vocab);
  Model lw = assemble_model(cfg, vocab, &cooc);
  CHECK(lw.cfg.mode == FeatureMode::windowed);
  CHECK(lw.cfg.half_window == cfg.half_window());
  CHECK(lw.assoc.rows() == vocab.n_labels());
  CHECK(lw.assoc.cols() == vocab.n_words());
  CHECK(lw.label_scale.size() == vocab.n_labels());
}

TEST_CASE("training is reproducible in the seed") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();

  auto run = [&](std::uint64_t seed) {
    TrainConfig c = cfg;
    c.seed = seed;
    Model model = assemble_model(c, vocab, nullptr);
    return train(model, data.train, data.dev, vocab, c);
  };
  TrainResult a = run(5), b = run(5), c = run(6);

  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].epoch == b.log[i].epoch);
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].dev_f1 == b.log[i].dev_f1);
    CHECK(a.log[i].lr == b.log[i].lr);
  }
  auto at = a.model.tensors(), bt = b.model.tensors();
  for (std::size_t i = 0; i < at.size(); ++i)
    for (Index j = 0; j < at[i].size(); ++j)
      CHECK(at[i].data[j] == bt[i].data[j]);

  bool differs = false;
  for (std::size_t i = 0; i < a.log.size(); ++i)
    if (a.log[i].train_loss != c.log[i].train_loss) differs = true;
  CHECK(differs);
}

TEST_CASE("the returned model is the best dev epoch") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();
  cfg.epochs = 4;
  const CooccurrenceMatrix cooc = finalized_cooc(data.train, vocab);
  cfg.mode = FeatureMode::windowed;
  Model model = assemble_model(cfg, vocab, &cooc);
  TrainResult r = train(model, data.train, data.dev, vocab, cfg);

  REQUIRE(r.log.size() == 4);
  double best = -1.0;
  for (const EpochRecord& rec : r.log) best = std::max(best, rec.dev_f1);
  CHECK(r.best_dev_f1 == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.best_epoch >= 1);
  CHECK(r.best_epoch <= 4);
  // the stored parameters reproduce the recorded best dev score
  const auto pred = predict_corpus(r.model, data.dev, vocab);
  CHECK(conll_f1(data.dev, pred).f1() == doctest::Approx(r.best_dev_f1).epsilon(1e-12));
}

TEST_CASE("a tiny corpus is learned to perfect dev F1") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();
  cfg.epochs = 12;
  cfg.gru_units = 16;
  cfg.embed_dim = 16;
  Model model = assemble_model(cfg, vocab, nullptr);
  TrainResult r = train(model, data.train, data.dev, vocab, cfg);
  CHECK(r.best_dev_f1 >= 0.99);
}

TEST_CASE("non-finite losses abort with a divergence error") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();
  cfg.lr = 1e308;  // first step overflows the parameters
  cfg.epochs = 3;
  cfg.dropout = 0.0;
  Model model = assemble_model(cfg, vocab, nullptr);
  try {
    train(model, data.train, data.dev, vocab, cfg);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("training diverged") != std::string::npos);
  }
}

TEST_CASE("training rejects unusable corpora") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();
  Model model = assemble_model(cfg, vocab, nullptr);

  Corpus empty;
  CHECK_THROWS_AS(train(model, empty, data.dev, vocab, cfg), Error);
  Corpus unlabeled = data.train;
  for (Utterance& u : unlabeled.utterances) u.labels.clear();
  CHECK_THROWS_AS(train(model, unlabeled, data.dev, vocab, cfg), Error);
}

TEST_CASE("the JSONL log mirrors the epoch records") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();
  cfg.epochs = 3;
  Model model = assemble_model(cfg, vocab, nullptr);
  std::ostringstream log;
  TrainResult r = train(model, data.train, data.dev, vocab, cfg, &log);

  std::istringstream lines(log.str());
  std::string line;
  std::size_t i = 0;
  while (std::getline(lines, line)) {
    REQUIRE(i < r.log.size());
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("epoch").get<int>() == int(i) + 1);
    CHECK(j.at("train_loss").get<double>() ==
          doctest::Approx(r.log[i].train_loss).epsilon(1e-12));
    CHECK(j.at("dev_f1").get<double>() ==
          doctest::Approx(r.log[i].dev_f1).epsilon(1e-12));
    CHECK(j.at("lr").get<double>() == doctest::Approx(r.log[i].lr).epsilon(1e-12));
    ++i;
  }
  CHECK(i == 3);
  CHECK(r.log[0].lr == cfg.lr);  // recorded before any plateau reduction
}

TEST_CASE("predict_corpus decodes one label per token") {
  const SynthCorpus& data = fixture();
  const Vocab vocab = Vocab::build(data.train, data.dev);
  TrainConfig cfg = small_config();
  Model model = assemble_model(cfg, vocab, nullptr);
  const auto pred = predict_corpus(model, data.test, vocab);
  REQUIRE(pred.size() == data.test.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    CHECK(pred[i].size() == data.test.utterances[i].size());
    for (const std::string& l : pred[i]) CHECK(vocab.has_label(l));
  }
}
