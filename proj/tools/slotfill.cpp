// Command-line surface for the slot-filling toolkit: train, eval, predict,
// reduce, synth, gradcheck.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slotfill/cooccurrence.hpp"
#include "slotfill/corpus.hpp"
#include "slotfill/evaluation.hpp"
#include "slotfill/gradcheck.hpp"
#include "slotfill/manifest.hpp"
#include "slotfill/model.hpp"
#include "slotfill/synth.hpp"
#include "slotfill/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slotfill;

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("SLOTFILL_OUT_DIR")) return env;
  return "slotfill-out";
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  require(!ec, "cannot create output directory: " + dir);
  return p;
}

std::set<std::string> resolve_stopwords(const std::string& path) {
  if (path.empty()) return default_stopwords();
  return load_stopwords(path);
}

// Config-file values first, then explicit command-line overrides.
struct TrainOptions {
  std::string config_path;
  std::optional<std::string> mode, loss;
  std::optional<int> batch_size, epochs, patience, gru_units, embed_dim,
      window, pool_stride;
  std::optional<double> lr, l2_reg, dropout, min_improvement;
  std::optional<bool> reg_window;
  std::optional<std::uint64_t> seed;

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!config_path.empty())
      for (const auto& [key, value] : read_config_file(config_path))
        apply_option(cfg, key, value);
    if (mode) cfg.mode = parse_feature_mode(*mode);
    if (loss) cfg.loss = parse_loss_mode(*loss);
    if (batch_size) cfg.batch_size = *batch_size;
    if (epochs) cfg.epochs = *epochs;
    if (patience) cfg.patience = *patience;
    if (gru_units) cfg.gru_units = *gru_units;
    if (embed_dim) cfg.embed_dim = *embed_dim;
    if (window) cfg.window = *window;
    if (pool_stride) cfg.pool_stride = *pool_stride;
    if (lr) cfg.lr = *lr;
    if (l2_reg) cfg.l2_reg = *l2_reg;
    if (dropout) cfg.dropout = *dropout;
    if (min_improvement) cfg.min_improvement = *min_improvement;
    if (reg_window) cfg.reg_window = *reg_window;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--mode", o.mode, "bl | le-plain | le-window");
  cmd->add_option("--loss", o.loss, "crf | softmax");
  cmd->add_option("--batch-size", o.batch_size);
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--patience", o.patience);
  cmd->add_option("--gru-units", o.gru_units);
  cmd->add_option("--embed-dim", o.embed_dim);
  cmd->add_option("--window", o.window, "context width 2q+1 (odd)");
  cmd->add_option("--stride", o.pool_stride, "max-pool stride over labels");
  cmd->add_option("--lr", o.lr);
  cmd->add_option("--l2-reg", o.l2_reg);
  cmd->add_option("--dropout", o.dropout);
  cmd->add_option("--min-improvement", o.min_improvement);
  cmd->add_option("--reg-window", o.reg_window,
                  "include window weights in the L2 penalty");
  cmd->add_option("--seed", o.seed);
}

json epochs_json(const std::vector<EpochRecord>& log) {
  json arr = json::array();
  for (const EpochRecord& r : log)
    arr.push_back({{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"dev_f1", r.dev_f1},
                   {"lr", r.lr}});
  return arr;
}

int cmd_train(const TrainOptions& opts, const std::string& train_path,
              const std::string& dev_path, const std::string& test_path,
              const std::string& pretrained_path, const std::string& out_dir,
              int runs) {
  require(runs >= 1, "--runs must be >= 1");
  const fs::path out = ensure_dir(out_dir);
  const TrainConfig base_cfg = opts.resolve();

  const Corpus train_corpus = load_conll(train_path);
  const Corpus dev_corpus = load_conll(dev_path);
  Corpus test_corpus;
  if (!test_path.empty()) test_corpus = load_conll(test_path);

  const Vocab vocab = Vocab::build(train_corpus, dev_corpus);
  vocab.save((out / "vocab.txt").string());

  CooccurrenceMatrix cooc(vocab.n_labels(), vocab.n_words());
  const bool needs_cooc = base_cfg.mode != FeatureMode::baseline;
  if (needs_cooc) {
    cooc = CooccurrenceMatrix::count(train_corpus, vocab);
    cooc.finalize();
    cooc.save((out / "cooc.txt").string());
  }

  json run_reports = json::array();
  std::vector<double> final_f1s;
  json parameters;
  for (int r = 0; r < runs; ++r) {
    TrainConfig cfg = base_cfg;
    cfg.seed = base_cfg.seed + std::uint64_t(r);
    const fs::path run_dir = runs == 1 ? out : ensure_dir((out / ("run-" + std::to_string(cfg.seed))).string());

    Model model = assemble_model(cfg, vocab, needs_cooc ? &cooc : nullptr);
    long pretrained_found = -1;
    if (!pretrained_path.empty())
      pretrained_found =
          load_pretrained_embeddings(pretrained_path, vocab, model.embeddings);
    if (parameters.is_null()) parameters = parameter_json(model);

    std::ofstream log_stream((run_dir / "train.log.jsonl").string());
    require(bool(log_stream), "cannot write training log");
    TrainResult result =
        train(std::move(model), train_corpus, dev_corpus, vocab, cfg, &log_stream);
    result.model.save((run_dir / "model.ckpt").string());

    json report{{"seed", cfg.seed},
                {"best_epoch", result.best_epoch},
                {"best_dev_f1", result.best_dev_f1},
                {"degenerate_distances", result.degenerate_distances},
                {"epochs", epochs_json(result.log)}};
    if (pretrained_found >= 0) report["pretrained_found"] = pretrained_found;
    double headline = result.best_dev_f1;
    if (!test_path.empty()) {
      const auto pred = predict_corpus(result.model, test_corpus, vocab);
      const F1Score f1 = conll_f1(test_corpus, pred);
      report["test_f1"] = f1.f1();
      headline = f1.f1();
    }
    final_f1s.push_back(headline);
    run_reports.push_back(report);
    std::cout << "run seed=" << cfg.seed << " best_epoch=" << result.best_epoch
              << " best_dev_f1=" << result.best_dev_f1;
    if (!test_path.empty())
      std::cout << " test_f1=" << report["test_f1"].get<double>();
    std::cout << "\n";
  }

  double mean = 0.0;
  for (double f : final_f1s) mean += f;
  mean /= double(final_f1s.size());
  double var = 0.0;
  for (double f : final_f1s) var += (f - mean) * (f - mean);
  const double stddev =
      final_f1s.size() > 1 ? std::sqrt(var / double(final_f1s.size() - 1)) : 0.0;

  json manifest{{"toolkit_version", kToolkitVersion},
                {"command", "train"},
                {"config", config_json(base_cfg)},
                {"runs", runs},
                {"data_digests",
                 {{"train", file_digest(train_path)}, {"dev", file_digest(dev_path)}}},
                {"parameters", parameters},
                {"run_reports", run_reports},
                {"f1_mean", mean},
                {"f1_stddev", stddev}};
  if (!test_path.empty())
    manifest["data_digests"]["test"] = file_digest(test_path);
  if (!pretrained_path.empty())
    manifest["data_digests"]["pretrained"] = file_digest(pretrained_path);
  write_manifest((out / "manifest.json").string(), manifest);
  std::cout << "f1 mean=" << mean << " stddev=" << stddev << "\n";
  return 0;
}

json error_counts_json(const ErrorCounts& e) {
  return json{{"word_errors", e.word_errors},
              {"utterance_errors", e.utterance_errors}};
}

void write_report_txt(std::ostream& os, const EvalReport& rep, std::size_t top_k) {
  os << "chunk precision: " << rep.chunks.precision() << "\n"
     << "chunk recall:    " << rep.chunks.recall() << "\n"
     << "chunk F1:        " << rep.chunks.f1() << "\n"
     << "gold chunks " << rep.chunks.gold << ", predicted " << rep.chunks.predicted
     << ", correct " << rep.chunks.correct << "\n\n"
     << "errors (with BIO):    words " << rep.with_bio.word_errors
     << ", utterances " << rep.with_bio.utterance_errors << "\n"
     << "errors (concept only): words " << rep.concept_only.word_errors
     << ", utterances " << rep.concept_only.utterance_errors << "\n\n"
     << "top mislabelled non-stop words (with BIO):\n";
  for (const auto& [word, n] : top_errors(rep.with_bio.per_word, top_k))
    os << "  " << word << "\t" << n << "\n";
}

int cmd_eval(const std::string& model_path, const std::string& vocab_path,
             const std::string& test_path, const std::string& compare_path,
             const std::string& stopword_path, const std::string& out_dir,
             std::size_t top_k) {
  const fs::path out = ensure_dir(out_dir);
  const Model model = Model::load(model_path);
  const Vocab vocab = Vocab::load(vocab_path);
  const Corpus test = load_conll(test_path);
  const std::set<std::string> stopwords = resolve_stopwords(stopword_path);

  const auto pred = predict_corpus(model, test, vocab);
  save_conll_predictions(test, pred, (out / "predictions.conll").string());
  const EvalReport rep = evaluate(test, pred, stopwords);

  std::ofstream txt((out / "report.txt").string());
  require(bool(txt), "cannot write report.txt");
  write_report_txt(txt, rep, top_k);

  std::ofstream jsonl((out / "report.jsonl").string());
  require(bool(jsonl), "cannot write report.jsonl");
  json f1_line{{"record", "conll_f1"},
               {"precision", rep.chunks.precision()},
               {"recall", rep.chunks.recall()},
               {"f1", rep.chunks.f1()},
               {"gold", rep.chunks.gold},
               {"predicted", rep.chunks.predicted},
               {"correct", rep.chunks.correct}};
  jsonl << f1_line.dump() << "\n";
  json err_line{{"record", "errors"},
                {"with_bio", error_counts_json(rep.with_bio)},
                {"concept_only", error_counts_json(rep.concept_only)}};
  jsonl << err_line.dump() << "\n";
  for (const auto& [word, n] : top_errors(rep.with_bio.per_word, top_k))
    jsonl << json{{"record", "top_error"}, {"word", word}, {"count", n}}.dump()
          << "\n";

  std::cout << "F1 " << rep.chunks.f1() << " (P " << rep.chunks.precision()
            << ", R " << rep.chunks.recall() << ")\n";

  if (!compare_path.empty()) {
    const Model other = Model::load(compare_path);
    const auto pred_b = predict_corpus(other, test, vocab);
    save_conll_predictions(test, pred_b, (out / "predictions.compare.conll").string());
    const EvalReport rep_b = evaluate(test, pred_b, stopwords);
    const SystemComparison cmp = compare_systems(test, pred, pred_b, false, stopwords);

    json cmp_line{{"record", "compare"},
                  {"total_a", rep.with_bio.utterance_errors},
                  {"total_b", rep_b.with_bio.utterance_errors},
                  {"shared", cmp.shared.size()},
                  {"unique_a", cmp.unique_a.size()},
                  {"unique_b", cmp.unique_b.size()}};
    jsonl << cmp_line.dump() << "\n";

    // Per-word FC-profile comparison: paired Wilcoxon over the label axis.
    const FcProfiles prof_a = accumulate_fc_profiles(model, test, vocab);
    const FcProfiles prof_b = accumulate_fc_profiles(other, test, vocab);
    long tested = 0, significant = 0;
    std::ofstream wilcoxon_out((out / "fc_wilcoxon.jsonl").string());
    require(bool(wilcoxon_out), "cannot write fc_wilcoxon.jsonl");
    for (int w = 0; w < vocab.n_words(); ++w) {
      if (!prof_a.seen[std::size_t(w)]) continue;
      const WilcoxonResult wil = wilcoxon_signed_rank(
          prof_a.rows.row(w).transpose(), prof_b.rows.row(w).transpose());
      ++tested;
      const bool sig = !wil.degenerate && wil.p_value <= 0.05;
      if (sig) ++significant;
      wilcoxon_out << json{{"record", "fc_wilcoxon"},
                           {"word", vocab.word(w)},
                           {"statistic", wil.statistic},
                           {"p_value", wil.p_value},
                           {"n_effective", wil.n_effective},
                           {"degenerate", wil.degenerate},
                           {"significant", sig}}
                          .dump()
                   << "\n";
    }
    json wil_line{{"record", "fc_wilcoxon_summary"},
                  {"alpha", 0.05},
                  {"words_tested", tested},
                  {"significant", significant}};
    jsonl << wil_line.dump() << "\n";
    std::cout << "compare: shared " << cmp.shared.size() << ", unique A "
              << cmp.unique_a.size() << ", unique B " << cmp.unique_b.size()
              << "; FC-profile words significantly different: " << significant
              << "/" << tested << "\n";
  }

  json manifest{{"toolkit_version", kToolkitVersion},
                {"command", "eval"},
                {"data_digests",
                 {{"model", file_digest(model_path)},
                  {"vocab", file_digest(vocab_path)},
                  {"test", file_digest(test_path)}}},
                {"f1", rep.chunks.f1()}};
  if (!compare_path.empty())
    manifest["data_digests"]["compare_model"] = file_digest(compare_path);
  write_manifest((out / "eval.manifest.json").string(), manifest);
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& vocab_path,
                const std::string& input_path, const std::string& out_path) {
  const Model model = Model::load(model_path);
  const Vocab vocab = Vocab::load(vocab_path);
  const Corpus input = load_conll(input_path, /*require_labels=*/false);
  const auto pred = predict_corpus(model, input, vocab);
  save_conll_predictions(input, pred, out_path);
  std::cout << "wrote " << out_path << " (" << input.size() << " utterances)\n";
  return 0;
}

int cmd_reduce(const std::string& train_path, const std::string& dev_path,
               int m_cap, const std::string& out_dir) {
  const fs::path out = ensure_dir(out_dir);
  const Corpus train_corpus = load_conll(train_path);
  const Corpus dev_corpus = load_conll(dev_path);
  const Vocab vocab = Vocab::build(train_corpus, dev_corpus);
  const auto [train_red, dev_red] = reduce_corpus(train_corpus, dev_corpus, vocab, m_cap);
  save_conll(train_red, (out / "train.reduced.conll").string());
  save_conll(dev_red, (out / "dev.reduced.conll").string());

  json manifest{{"toolkit_version", kToolkitVersion},
                {"command", "reduce"},
                {"m_cap", m_cap},
                {"data_digests",
                 {{"train", file_digest(train_path)}, {"dev", file_digest(dev_path)}}},
                {"train_utterances_before", train_corpus.size()},
                {"train_utterances_after", train_red.size()},
                {"dev_utterances_before", dev_corpus.size()},
                {"dev_utterances_after", dev_red.size()}};
  write_manifest((out / "reduce.manifest.json").string(), manifest);
  std::cout << "train " << train_corpus.size() << " -> " << train_red.size()
            << ", dev " << dev_corpus.size() << " -> " << dev_red.size() << "\n";
  return 0;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir) {
  const fs::path out = ensure_dir(out_dir);
  const SynthCorpus data = generate_synthetic(cfg);
  save_conll(data.train, (out / "train.conll").string());
  save_conll(data.dev, (out / "dev.conll").string());
  save_conll(data.test, (out / "test.conll").string());

  json manifest{{"toolkit_version", kToolkitVersion},
                {"command", "synth"},
                {"seed", cfg.seed},
                {"n_labels", cfg.n_labels},
                {"n_templates", cfg.n_templates},
                {"train_utterances", data.train.size()},
                {"dev_utterances", data.dev.size()},
                {"test_utterances", data.test.size()}};
  write_manifest((out / "synth.manifest.json").string(), manifest);
  std::cout << "wrote " << data.train.size() << "/" << data.dev.size() << "/"
            << data.test.size() << " utterances to " << out_dir << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& mode, const std::string& loss, int n_words,
                  int n_labels, int embed_dim, int gru_units, int length,
                  int window, int stride, int batch, std::uint64_t seed,
                  double epsilon, double tolerance, double l2_reg,
                  const std::string& corrupt) {
  require(window >= 1 && window % 2 == 1, "window must be odd");
  ModelConfig mc;
  mc.n_words = n_words;
  mc.n_labels = n_labels;
  mc.embed_dim = embed_dim;
  mc.hidden_dim = gru_units;
  mc.half_window = (window - 1) / 2;
  mc.pool_stride = stride;
  mc.mode = parse_feature_mode(mode);
  mc.loss = parse_loss_mode(loss);

  std::mt19937_64 rng(seed);
  Matd assoc;
  if (mc.mode != FeatureMode::baseline) {
    // Random strictly-positive row-normalized association matrix.
    assoc.resize(n_labels, n_words);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (Index r = 0; r < assoc.rows(); ++r) {
      for (Index c = 0; c < assoc.cols(); ++c) assoc(r, c) = u(rng);
      assoc.row(r) /= assoc.row(r).sum();
    }
  }
  Model model = Model::create(mc, mc.mode != FeatureMode::baseline ? &assoc : nullptr, rng);

  std::uniform_int_distribution<int> word_dist(0, n_words - 1);
  std::uniform_int_distribution<int> label_dist(0, n_labels - 1);
  std::vector<std::vector<int>> words(static_cast<std::size_t>(batch));
  std::vector<std::vector<int>> labels(static_cast<std::size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < length; ++t) {
      words[std::size_t(b)].push_back(word_dist(rng));
      labels[std::size_t(b)].push_back(label_dist(rng));
    }
  }

  GradCheckOptions opt;
  opt.epsilon = epsilon;
  opt.tolerance = tolerance;
  opt.l2_reg = l2_reg;
  opt.corrupt_tensor = corrupt;
  const GradCheckReport report = grad_check(model, words, labels, opt);

  std::cout << "tensor                       max_rel_err\n";
  for (const GradCheckEntry& e : report.entries) {
    std::cout << e.tensor;
    for (std::size_t pad = e.tensor.size(); pad < 28; ++pad) std::cout << ' ';
    std::cout << e.max_rel_err << (e.max_rel_err < tolerance ? "" : "  <-- FAIL")
              << "\n";
  }
  std::cout << "worst " << report.worst() << " tolerance " << tolerance << " => "
            << (report.passed() ? "PASS" : "FAIL") << "\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slot-filling tagger with co-occurrence label embeddings"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a tagger");
  TrainOptions topts;
  std::string train_path, dev_path, test_path, pretrained_path, stopword_path;
  std::string out_dir = default_out_dir();
  int runs = 1;
  add_train_options(train_cmd, topts);
  train_cmd->add_option("--train", train_path, "training CoNLL file")->required();
  train_cmd->add_option("--dev", dev_path, "dev CoNLL file")->required();
  train_cmd->add_option("--test", test_path, "optional test CoNLL file");
  train_cmd->add_option("--pretrained-embeddings", pretrained_path,
                        "text embeddings: word v1 .. vd");
  train_cmd->add_option("--out-dir", out_dir, "output directory");
  train_cmd->add_option("--runs", runs, "independent seeds (seed, seed+1, ...)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a test set");
  std::string model_path, vocab_path, eval_test_path, compare_path;
  std::string eval_out_dir = default_out_dir();
  std::size_t top_k = 5;
  eval_cmd->add_option("--model", model_path, "checkpoint")->required();
  eval_cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
  eval_cmd->add_option("--test", eval_test_path, "labeled CoNLL file")->required();
  eval_cmd->add_option("--compare", compare_path, "second checkpoint to compare");
  eval_cmd->add_option("--stopwords", stopword_path, "stopword file (default: built-in)");
  eval_cmd->add_option("--out-dir", eval_out_dir, "output directory");
  eval_cmd->add_option("--top-k", top_k, "rows in the mislabelled-word table");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "tag a file (labels optional)");
  std::string input_path, predict_out;
  predict_cmd->add_option("--model", model_path, "checkpoint")->required();
  predict_cmd->add_option("--vocab", vocab_path, "vocabulary file")->required();
  predict_cmd->add_option("--input", input_path, "CoNLL file, labels optional")->required();
  predict_cmd->add_option("--out", predict_out, "output predictions file")->required();

  // reduce
  auto* reduce_cmd = app.add_subcommand("reduce", "vocabulary-coverage reduction");
  int m_cap = 5;
  std::string reduce_out_dir = default_out_dir();
  reduce_cmd->add_option("--train", train_path, "training CoNLL file")->required();
  reduce_cmd->add_option("--dev", dev_path, "dev CoNLL file")->required();
  reduce_cmd->add_option("--m-cap", m_cap, "utterances kept per covered word")->required();
  reduce_cmd->add_option("--out-dir", reduce_out_dir, "output directory");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthConfig scfg;
  std::string synth_out_dir = default_out_dir();
  synth_cmd->add_option("--labels", scfg.n_labels, "label vocabulary size");
  synth_cmd->add_option("--templates", scfg.n_templates);
  synth_cmd->add_option("--train-utterances", scfg.train_utterances);
  synth_cmd->add_option("--dev-utterances", scfg.dev_utterances);
  synth_cmd->add_option("--test-utterances", scfg.test_utterances);
  synth_cmd->add_option("--seed", scfg.seed);
  synth_cmd->add_option("--out-dir", synth_out_dir, "output directory");

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  std::string gmode = "bl", gloss = "crf", corrupt;
  int gn = 12, gm = 5, gd = 8, gh = 4, gk = 7, gwindow = 5, gstride = 10, gbatch = 2;
  std::uint64_t gseed = 1;
  double geps = 1e-5, gtol = 1e-4, gl2 = 1e-6;
  grad_cmd->add_option("--mode", gmode, "bl | le-plain | le-window");
  grad_cmd->add_option("--loss", gloss, "crf | softmax");
  grad_cmd->add_option("--words", gn, "vocabulary size n");
  grad_cmd->add_option("--labels", gm, "label count m");
  grad_cmd->add_option("--embed-dim", gd);
  grad_cmd->add_option("--gru-units", gh);
  grad_cmd->add_option("--length", gk, "utterance length k");
  grad_cmd->add_option("--window", gwindow, "context width 2q+1");
  grad_cmd->add_option("--stride", gstride);
  grad_cmd->add_option("--batch", gbatch, "utterances in the checked batch");
  grad_cmd->add_option("--seed", gseed);
  grad_cmd->add_option("--epsilon", geps);
  grad_cmd->add_option("--tolerance", gtol);
  grad_cmd->add_option("--l2-reg", gl2);
  grad_cmd->add_option("--corrupt", corrupt,
                       "corrupt this gradient tensor (negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed())
      return cmd_train(topts, train_path, dev_path, test_path, pretrained_path,
                       out_dir, runs);
    if (eval_cmd->parsed())
      return cmd_eval(model_path, vocab_path, eval_test_path, compare_path,
                      stopword_path, eval_out_dir, top_k);
    if (predict_cmd->parsed())
      return cmd_predict(model_path, vocab_path, input_path, predict_out);
    if (reduce_cmd->parsed())
      return cmd_reduce(train_path, dev_path, m_cap, reduce_out_dir);
    if (synth_cmd->parsed()) return cmd_synth(scfg, synth_out_dir);
    if (grad_cmd->parsed())
      return cmd_gradcheck(gmode, gloss, gn, gm, gd, gh, gk, gwindow, gstride,
                           gbatch, gseed, geps, gtol, gl2, corrupt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
