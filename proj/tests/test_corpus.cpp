#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "slotfill/corpus.hpp"

using namespace slotfill;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("BioTag parses and prints the three shapes") {
  CHECK(BioTag::parse("O").prefix == 'O');
  CHECK(BioTag::parse("O").name.empty());
  CHECK(BioTag::parse("B-city").prefix == 'B');
  CHECK(BioTag::parse("B-city").name == "city");
  CHECK(BioTag::parse("I-reponse-oui").name == "reponse-oui");
  CHECK(BioTag::parse("B-city").str() == "B-city");
  CHECK(BioTag::parse("O").str() == "O");
  CHECK_THROWS_AS(BioTag::parse("city"), Error);
  CHECK_THROWS_AS(BioTag::parse("B"), Error);
  CHECK_THROWS_AS(BioTag::parse("X-city"), Error);
  CHECK_THROWS_AS(BioTag::parse(""), Error);
}

TEST_CASE("load_conll reads tab- and space-separated token lines") {
  TempDir tmp;
  const auto path = write_file(tmp.file("c.conll"),
                               "show\tO\n"
                               "boston B-city\n"
                               "\n"
                               "\n"
                               "hi\tO\n");
  const Corpus c = load_conll(path);
  REQUIRE(c.size() == 2);
  CHECK(c.utterances[0].words == std::vector<std::string>{"show", "boston"});
  CHECK(c.utterances[0].labels == std::vector<std::string>{"O", "B-city"});
  CHECK(c.utterances[1].words == std::vector<std::string>{"hi"});
  CHECK(c.token_count() == 3);
  CHECK(c.labeled());
}

TEST_CASE("load_conll handles CRLF and reports malformed lines with position") {
  TempDir tmp;
  const Corpus c =
      load_conll(write_file(tmp.file("crlf.conll"), "a\tO\r\n\r\nb\tO\r\n"));
  CHECK(c.size() == 2);

  CHECK_THROWS_AS(load_conll(write_file(tmp.file("x1.conll"), "a\tO B\n")), Error);
  CHECK_THROWS_AS(load_conll(write_file(tmp.file("x2.conll"), " a\tO\n")), Error);
  CHECK_THROWS_AS(load_conll(write_file(tmp.file("x3.conll"), "\n\n")), Error);
  CHECK_THROWS_AS(load_conll(tmp.file("missing.conll")), Error);
  try {
    load_conll(write_file(tmp.file("x4.conll"), "a\tO\nb\n"));
    FAIL("missing label accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("load_conll without labels, and mixing is rejected") {
  TempDir tmp;
  const Corpus c = load_conll(
      write_file(tmp.file("u.conll"), "show\nme\n\nflights\n"), false);
  REQUIRE(c.size() == 2);
  CHECK(!c.utterances[0].labeled());
  CHECK(!c.labeled());
  CHECK_THROWS_AS(
      load_conll(write_file(tmp.file("mix.conll"), "a\tO\nb\n"), false), Error);
}

TEST_CASE("save_conll round-trips a labeled corpus") {
  TempDir tmp;
  Corpus c;
  c.utterances.push_back({{"a", "b"}, {"O", "B-x"}});
  c.utterances.push_back({{"c"}, {"I-x"}});
  save_conll(c, tmp.file("out.conll"));
  const Corpus back = load_conll(tmp.file("out.conll"));
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back.utterances[i].words == c.utterances[i].words);
    CHECK(back.utterances[i].labels == c.utterances[i].labels);
  }
}

TEST_CASE("save_conll_predictions writes aligned three-column rows") {
  TempDir tmp;
  Corpus c;
  c.utterances.push_back({{"a", "b"}, {"O", "B-x"}});
  save_conll_predictions(c, {{"O", "O"}}, tmp.file("p.conll"));
  std::ifstream in(tmp.file("p.conll"));
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1 == "a\tO\tO");
  CHECK(l2 == "b\tB-x\tO");
  CHECK_THROWS_AS(save_conll_predictions(c, {{"O"}}, tmp.file("q.conll")), Error);
  CHECK_THROWS_AS(save_conll_predictions(c, {}, tmp.file("q.conll")), Error);
}

namespace {

Corpus corpus_of(std::vector<std::vector<std::string>> words) {
  Corpus c;
  for (auto& w : words) {
    Utterance u;
    u.words = w;
    u.labels.assign(w.size(), "O");
    c.utterances.push_back(u);
  }
  return c;
}

}  // namespace

TEST_CASE("Vocab assigns first-appearance ids and reserves <unk>/<pad> last") {
  const Corpus train = corpus_of({{"b", "a", "b"}, {"c"}});
  const Corpus dev = corpus_of({{"a", "d"}});
  const Vocab v = Vocab::build(train, dev);

  CHECK(v.n_words() == 6);  // b a c d <unk> <pad>
  CHECK(v.word_id("b") == 0);
  CHECK(v.word_id("a") == 1);
  CHECK(v.word_id("c") == 2);
  CHECK(v.word_id("d") == 3);
  CHECK(v.unk_id() == 4);
  CHECK(v.pad_id() == 5);
  CHECK(v.word(v.unk_id()) == Vocab::kUnk);
  CHECK(v.word_id("zzz") == v.unk_id());

  CHECK(v.count("b") == 2);
  CHECK(v.count("a") == 2);
  CHECK(v.train_count("a") == 1);
  CHECK(v.dev_count("a") == 1);
  CHECK(v.dev_count("b") == 0);
  CHECK(v.count("zzz") == 0);

  CHECK(v.n_labels() == 1);
  CHECK(v.label_id("O") == 0);
  CHECK(v.has_label("O"));
  CHECK(!v.has_label("B-x"));
  CHECK_THROWS_AS(v.label_id("B-x"), Error);
}

TEST_CASE("Vocab encode/decode round-trips; OOV maps to <unk>") {
  const Corpus train = corpus_of({{"a", "b"}});
  const Vocab v = Vocab::build(train, Corpus{});
  Utterance u;
  u.words = {"b", "zzz", "a"};
  u.labels = {"O", "O", "O"};
  const std::vector<int> ids = v.encode_words(u);
  CHECK(ids == std::vector<int>{1, v.unk_id(), 0});
  CHECK(v.decode_words(ids) ==
        std::vector<std::string>{"b", Vocab::kUnk, "a"});
  CHECK(v.encode_labels(u) == std::vector<int>{0, 0, 0});
  CHECK(v.decode_labels({0}) == std::vector<std::string>{"O"});
  CHECK_THROWS_AS(Vocab::build(Corpus{}, Corpus{}), Error);
}

TEST_CASE("words_by_frequency ranks by count then lexicographically") {
  // counts: d=3, b=2, a=2, c=1 -> d, a, b, c (a before b on the tie)
  const Corpus train = corpus_of({{"d", "d", "b"}, {"b", "a", "c"}});
  const Corpus dev = corpus_of({{"d", "a"}});
  const Vocab v = Vocab::build(train, dev);
  std::vector<std::string> ranked;
  for (int id : v.words_by_frequency()) ranked.push_back(v.word(id));
  CHECK(ranked == std::vector<std::string>{"d", "a", "b", "c"});
}

TEST_CASE("Vocab save/load round-trips ids and counts") {
  TempDir tmp;
  const Corpus train = corpus_of({{"b", "a", "b"}, {"c"}});
  Corpus labeled = train;
  labeled.utterances[0].labels = {"O", "B-x", "I-x"};
  const Vocab v = Vocab::build(labeled, Corpus{});
  v.save(tmp.file("vocab.txt"));
  const Vocab w = Vocab::load(tmp.file("vocab.txt"));
  CHECK(w.n_words() == v.n_words());
  CHECK(w.n_labels() == v.n_labels());
  for (int i = 0; i < v.n_words(); ++i) CHECK(w.word(i) == v.word(i));
  for (int i = 0; i < v.n_labels(); ++i) CHECK(w.label(i) == v.label(i));
  CHECK(w.count("b") == 2);
  CHECK(w.unk_id() == v.unk_id());
  CHECK(w.pad_id() == v.pad_id());
  CHECK_THROWS_AS(Vocab::load(tmp.file("nope.txt")), Error);
  CHECK_THROWS_AS(
      Vocab::load(write_file(tmp.file("bad.txt"), "#words 1\nx\t5\t0\n")), Error);
}

TEST_CASE("validate_bio flags I- without a matching open concept") {
  CHECK(validate_bio({"O", "B-a", "I-a", "O"}).empty());
  CHECK(validate_bio({"B-a", "I-a", "I-a"}).empty());
  CHECK(validate_bio({"I-a"}) == std::vector<std::size_t>{0});
  CHECK(validate_bio({"O", "I-a"}) == std::vector<std::size_t>{1});
  CHECK(validate_bio({"B-a", "I-b"}) == std::vector<std::size_t>{1});
  CHECK(validate_bio({"B-a", "O", "I-a"}) == std::vector<std::size_t>{2});
  CHECK(validate_bio({"I-a", "I-a"}) == std::vector<std::size_t>{0});
  CHECK(validate_bio({}).empty());
}

TEST_CASE("reduce_corpus follows the manual trace on the ledger toy corpus") {
  // U0="a", U1="b", U2="a b c d", U3="c", U4="d"; every count is 2, so the
  // ranking is lexicographic: a, b, c, d.
  const Corpus train =
      corpus_of({{"a"}, {"b"}, {"a", "b", "c", "d"}, {"c"}, {"d"}});
  const Vocab v = Vocab::build(train, Corpus{});

  SUBCASE("m_cap=1 keeps U0, U1, U2") {
    // a -> U0; b -> U1; c -> U2 which covers both c and d; stop.
    const auto [red_train, red_dev] = reduce_corpus(train, Corpus{}, v, 1);
    REQUIRE(red_train.size() == 3);
    CHECK(red_train.utterances[0].words == std::vector<std::string>{"a"});
    CHECK(red_train.utterances[1].words == std::vector<std::string>{"b"});
    CHECK(red_train.utterances[2].words.size() == 4);
    CHECK(red_dev.size() == 0);
  }

  SUBCASE("m_cap=2 keeps U0 and U2 only (coverage completes early)") {
    // a -> U0 and U2; U2 covers b, c, d, so the walk stops after 'a'.
    const auto [red_train, red_dev] = reduce_corpus(train, Corpus{}, v, 2);
    REQUIRE(red_train.size() == 2);
    CHECK(red_train.utterances[0].words == std::vector<std::string>{"a"});
    CHECK(red_train.utterances[1].words.size() == 4);
    CHECK(red_dev.size() == 0);
  }
}

TEST_CASE("reduce_corpus covers the full vocabulary and respects splits") {
  const Corpus train = corpus_of(
      {{"x", "x"}, {"y"}, {"x", "z"}, {"w", "w", "w"}, {"y", "z"}});
  const Corpus dev = corpus_of({{"q", "x"}, {"y"}});
  const Vocab v = Vocab::build(train, dev);

  for (int m_cap : {1, 2, 5}) {
    CAPTURE(m_cap);
    const auto [red_train, red_dev] = reduce_corpus(train, dev, v, m_cap);
    std::set<std::string> seen;
    for (const Corpus* c : {&red_train, &red_dev})
      for (const auto& u : c->utterances)
        for (const auto& w : u.words) seen.insert(w);
    for (const std::string w : {"x", "y", "z", "w", "q"}) CHECK(seen.count(w));
    CHECK(red_train.size() <= train.size());
    CHECK(red_dev.size() <= dev.size());
  }
  // 'q' occurs only in dev, so its utterance must come from the dev split.
  const auto [rt1, rd1] = reduce_corpus(train, dev, v, 1);
  bool q_in_dev = false;
  for (const auto& u : rd1.utterances)
    for (const auto& w : u.words) q_in_dev |= (w == "q");
  CHECK(q_in_dev);
  CHECK_THROWS_AS(reduce_corpus(train, dev, v, 0), Error);
}

TEST_CASE("reduce_corpus skips words already covered by earlier picks") {
  // a's pick U0 also covers b, so b is skipped in the ranking walk and U1
  // only enters when the walk reaches c.
  const Corpus train = corpus_of({{"a", "b"}, {"b", "c"}, {"a"}});
  const Vocab v = Vocab::build(train, Corpus{});
  // counts: a=2, b=2, c=1 -> ranking a, b, c
  const auto [red, _] = reduce_corpus(train, Corpus{}, v, 1);
  REQUIRE(red.size() == 2);
  CHECK(red.utterances[0].words == std::vector<std::string>{"a", "b"});
  CHECK(red.utterances[1].words == std::vector<std::string>{"b", "c"});
}
