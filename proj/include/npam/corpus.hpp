#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "npam/random.hpp"

namespace npam {

using WordId = std::uint32_t;

// Dense bijection between word strings and ids 0..V-1.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  // Returns the id of `word`, adding it if unseen.
  WordId intern(std::string_view word);
  std::optional<WordId> find(std::string_view word) const;
  const std::string& word(WordId id) const;
  std::uint32_t size() const { return static_cast<std::uint32_t>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

  // Placeholder vocabulary "w0".."w{V-1}" for corpora loaded without one.
  static Vocabulary numbered(std::uint32_t size);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

struct Document {
  std::vector<WordId> tokens;
  std::string label;  // provenance only
};

class Corpus {
 public:
  Corpus() = default;
  // Throws InputError if any token id is outside the vocabulary.
  Corpus(std::vector<Document> documents, Vocabulary vocabulary);

  const std::vector<Document>& documents() const { return documents_; }
  const Document& document(std::size_t j) const { return documents_[j]; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  std::size_t num_documents() const { return documents_.size(); }
  std::uint32_t vocab_size() const { return vocabulary_.size(); }
  std::size_t num_tokens() const;
  std::vector<std::uint32_t> document_lengths() const;
  double mean_document_length() const;

 private:
  std::vector<Document> documents_;
  Vocabulary vocabulary_;
};

struct IngestOptions {
  bool lowercase = true;
  std::size_t min_token_length = 1;
  bool keep_empty_documents = false;
};

// One document per line; tokens are maximal ASCII-alphanumeric runs (bytes
// >= 0x80 are treated as word characters so UTF-8 words stay intact).
Corpus ingest_text(std::istream& lines, const IngestOptions& options = {});
Corpus ingest_text(const std::vector<std::string>& lines, const IngestOptions& options = {});

struct BowRecord {
  std::uint64_t doc;
  WordId word;
  std::int64_t count;
};

// Expands (doc, word, count) triples into documents ordered by doc id, with
// tokens in ascending word id. Documents are numbered densely in order of
// first appearance of their doc id after sorting.
Corpus load_bow(const std::vector<BowRecord>& records, std::uint32_t vocab_size);
// Reads the "V N_DOCS" header followed by triples.
Corpus read_bow(std::istream& in);
void write_bow(std::ostream& out, const Corpus& corpus);

Vocabulary read_vocabulary(std::istream& in);
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Synthetic grid data.

struct SyntheticSpec {
  std::uint32_t grid = 5;        // v
  std::uint32_t num_super = 2;   // s2
  std::uint32_t num_sub = 4;     // s3
  std::uint32_t num_docs = 100;
  std::uint32_t doc_length = 200;
  double root_dirichlet = 1.0;
  double super_dirichlet = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TopicPair {
  std::uint32_t super_topic;
  std::uint32_t sub_topic;
  bool operator==(const TopicPair&) const = default;
};

// A row or a column of the v-by-v grid.
struct GridLine {
  bool is_row;
  std::uint32_t index;
  bool operator==(const GridLine&) const = default;
};

struct GroundTruth {
  std::vector<std::vector<TopicPair>> labels;       // [doc][token]
  std::vector<GridLine> sub_topics;                 // empty for non-grid data
  std::vector<std::vector<std::uint32_t>> super_topics;  // children per super-topic

  std::size_t num_tokens() const;
};

void write_ground_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_ground_truth(std::istream& in);

// Vocabulary cell names "r{row}c{col}", id = row * v + col.
Vocabulary grid_vocabulary(std::uint32_t grid);
std::vector<WordId> grid_line_cells(std::uint32_t grid, GridLine line);

std::pair<Corpus, GroundTruth> generate_synthetic(const SyntheticSpec& spec, Rng& rng);

// Reorders every document's tokens (and matching truth labels) by ascending
// word id, stable. This is the token order a bag-of-words round trip yields.
void sort_tokens_by_word(Corpus& corpus, GroundTruth& truth);

// ---------------------------------------------------------------------------

struct Fold {
  Corpus train;
  Corpus test;
  std::vector<std::size_t> test_documents;  // indices into the source corpus
};

// k near-equal folds over a shuffled document order; the first
// (n mod k) folds receive one extra document.
std::vector<Fold> split_folds(const Corpus& corpus, std::uint32_t k, Rng& rng);

}  // namespace npam
