#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "npam/corpus.hpp"
#include "npam/error.hpp"

using namespace npam;

TEST_CASE("ingest_text tokenizes and builds vocabulary in first-appearance order") {
  const auto c = ingest_text(std::vector<std::string>{"cat dog", "dog dog"});
  CHECK(c.vocab_size() == 2);
  REQUIRE(c.num_documents() == 2);
  CHECK(c.document(0).tokens == std::vector<WordId>{0, 1});
  CHECK(c.document(1).tokens == std::vector<WordId>{1, 1});
  CHECK(c.vocabulary().word(0) == "cat");
}

TEST_CASE("ingest_text drops empty lines and lowercases") {
  CHECK(ingest_text(std::vector<std::string>{"", "cat"}).num_documents() == 1);
  const auto c = ingest_text(std::vector<std::string>{"A a a."});
  CHECK(c.vocab_size() == 1);
  CHECK(c.document(0).tokens == std::vector<WordId>{0, 0, 0});
}

TEST_CASE("ingest_text options") {
  IngestOptions o;
  o.min_token_length = 2;
  const auto c = ingest_text(std::vector<std::string>{"a bb ccc", "x"}, o);
  CHECK(c.vocab_size() == 2);
  CHECK(c.num_documents() == 1);
  o.keep_empty_documents = true;
  CHECK(ingest_text(std::vector<std::string>{"a bb ccc", "x"}, o).num_documents() == 2);
  o = IngestOptions{};
  o.lowercase = false;
  CHECK(ingest_text(std::vector<std::string>{"A a"}, o).vocab_size() == 2);
  CHECK_THROWS_AS(ingest_text(std::vector<std::string>{"", " ... "}), EmptyCorpusError);
}

TEST_CASE("load_bow expands triples") {
  const auto c = load_bow({{0, 1, 2}, {0, 0, 1}}, 2);
  REQUIRE(c.num_documents() == 1);
  CHECK(c.document(0).tokens == std::vector<WordId>{0, 1, 1});
  CHECK_THROWS_AS(load_bow({}, 5), EmptyCorpusError);
  CHECK_THROWS_AS(load_bow({{0, 4, 1}}, 3), FormatError);
  CHECK_THROWS_AS(load_bow({{0, 1, 0}}, 3), FormatError);
}

TEST_CASE("bag-of-words and vocabulary files round-trip") {
  const auto c = ingest_text(std::vector<std::string>{"b a b", "c a"});
  std::stringstream bow, voc;
  write_bow(bow, c);
  write_vocabulary(voc, c.vocabulary());
  CHECK(bow.str().rfind("3 2\n", 0) == 0);
  const auto back = read_bow(bow);
  const auto vocab = read_vocabulary(voc);
  CHECK(vocab.words() == c.vocabulary().words());
  REQUIRE(back.num_documents() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    auto a = c.document(j).tokens, b = back.document(j).tokens;
    std::sort(a.begin(), a.end());
    CHECK(a == b);
  }
  std::istringstream bad("2 1\n0 5 1\n");
  CHECK_THROWS_AS(read_bow(bad), FormatError);
}

TEST_CASE("synthetic corpus shape and emission support") {
  SyntheticSpec spec;  // v=5, s2=2, s3=4, 100 x 200
  spec.seed = 7;
  Rng rng(spec.seed);
  const auto [corpus, truth] = generate_synthetic(spec, rng);
  CHECK(corpus.vocab_size() == 25);
  CHECK(corpus.num_documents() == 100);
  CHECK(corpus.num_tokens() == 20000);
  CHECK(truth.num_tokens() == 20000);
  REQUIRE(truth.sub_topics.size() == 4);
  REQUIRE(truth.super_topics.size() == 2);

  std::set<std::pair<bool, std::uint32_t>> lines;
  for (const auto& l : truth.sub_topics) lines.insert({l.is_row, l.index});
  CHECK(lines.size() == 4);

  std::set<std::uint32_t> covered;
  for (const auto& children : truth.super_topics) {
    CHECK(!children.empty());
    covered.insert(children.begin(), children.end());
  }
  CHECK(covered.size() == 4);

  for (std::size_t j = 0; j < corpus.num_documents(); ++j)
    for (std::size_t i = 0; i < corpus.document(j).tokens.size(); ++i) {
      const auto w = corpus.document(j).tokens[i];
      const auto [sup, sub] = truth.labels[j][i];
      const auto& line = truth.sub_topics[sub];
      const auto r = w / 5, col = w % 5;
      CHECK((line.is_row ? r : col) == line.index);
      const auto& kids = truth.super_topics[sup];
      CHECK(std::find(kids.begin(), kids.end(), sub) != kids.end());
    }
}

TEST_CASE("grid lines have exactly v cells") {
  for (std::uint32_t v : {2u, 5u, 10u})
    for (std::uint32_t k = 0; k < v; ++k) {
      CHECK(grid_line_cells(v, GridLine{true, k}).size() == v);
      CHECK(grid_line_cells(v, GridLine{false, k}).size() == v);
    }
}

TEST_CASE("single-topic degenerate synthetic spec") {
  SyntheticSpec spec;
  spec.grid = 2;
  spec.num_super = 1;
  spec.num_sub = 1;
  spec.num_docs = 3;
  spec.doc_length = 50;
  Rng rng(1);
  const auto [corpus, truth] = generate_synthetic(spec, rng);
  std::set<WordId> used;
  for (const auto& d : corpus.documents()) used.insert(d.tokens.begin(), d.tokens.end());
  CHECK(used.size() <= 2);
  for (const auto& doc : truth.labels)
    for (const auto& p : doc) CHECK(p == TopicPair{0, 0});
}

TEST_CASE("synthetic generation is reproducible and validates its spec") {
  SyntheticSpec spec;
  spec.num_docs = 10;
  Rng a(3), b(3);
  const auto [c1, t1] = generate_synthetic(spec, a);
  const auto [c2, t2] = generate_synthetic(spec, b);
  std::stringstream s1, s2;
  write_bow(s1, c1);
  write_bow(s2, c2);
  CHECK(s1.str() == s2.str());
  CHECK(t1.labels == t2.labels);

  spec.num_sub = 11;
  CHECK_THROWS_AS(spec.validate(), SpecError);
  spec.num_sub = 4;
  spec.grid = 1;
  CHECK_THROWS_AS(spec.validate(), SpecError);
}

TEST_CASE("ground truth file round-trips") {
  SyntheticSpec spec;
  spec.num_docs = 4;
  spec.doc_length = 10;
  Rng rng(2);
  const auto [corpus, truth] = generate_synthetic(spec, rng);
  std::stringstream ss;
  write_ground_truth(ss, truth);
  const auto back = read_ground_truth(ss);
  CHECK(back.labels == truth.labels);
  CHECK(back.super_topics == truth.super_topics);
  CHECK(back.sub_topics == truth.sub_topics);
}

TEST_CASE("sorting tokens keeps labels attached") {
  SyntheticSpec spec;
  spec.num_docs = 5;
  spec.doc_length = 40;
  Rng rng(4);
  auto [corpus, truth] = generate_synthetic(spec, rng);
  std::multiset<std::tuple<std::size_t, WordId, std::uint32_t, std::uint32_t>> before, after;
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t i = 0; i < 40; ++i)
      before.insert({j, corpus.document(j).tokens[i], truth.labels[j][i].super_topic, truth.labels[j][i].sub_topic});
  sort_tokens_by_word(corpus, truth);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(std::is_sorted(corpus.document(j).tokens.begin(), corpus.document(j).tokens.end()));
    for (std::size_t i = 0; i < 40; ++i)
      after.insert({j, corpus.document(j).tokens[i], truth.labels[j][i].super_topic, truth.labels[j][i].sub_topic});
  }
  CHECK(before == after);
}

namespace {

Corpus docs(std::size_t n) {
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < n; ++i) lines.push_back("w" + std::to_string(i % 3) + " common");
  return ingest_text(lines);
}

}  // namespace

TEST_CASE("split_folds partitions documents") {
  Rng rng(1);
  auto folds = split_folds(docs(10), 5, rng);
  REQUIRE(folds.size() == 5);
  for (const auto& f : folds) {
    CHECK(f.test.num_documents() == 2);
    CHECK(f.train.num_documents() == 8);
    CHECK(f.train.vocab_size() == 4);
  }

  folds = split_folds(docs(11), 5, rng);
  std::vector<std::size_t> sizes;
  std::set<std::size_t> all;
  std::size_t total = 0;
  for (const auto& f : folds) {
    sizes.push_back(f.test.num_documents());
    all.insert(f.test_documents.begin(), f.test_documents.end());
    total += f.test_documents.size();
  }
  CHECK(sizes == std::vector<std::size_t>{3, 2, 2, 2, 2});
  CHECK(all.size() == 11);
  CHECK(total == 11);

  CHECK_THROWS_AS(split_folds(docs(3), 5, rng), SplitError);
  CHECK_THROWS_AS(split_folds(docs(3), 1, rng), SplitError);
}
