#include "npam/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>

#include "npam/error.hpp"
#include "npam/pam.hpp"

namespace npam {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  for (auto& w : words) {
    if (index_.contains(w)) throw FormatError("vocabulary: duplicate word '" + w + "'");
    index_.emplace(w, static_cast<WordId>(words_.size()));
    words_.push_back(std::move(w));
  }
}

WordId Vocabulary::intern(std::string_view word) {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  index_.emplace(words_.back(), id);
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::word(WordId id) const {
  if (id >= words_.size()) throw InputError("vocabulary: id " + std::to_string(id) + " out of range");
  return words_[id];
}

Vocabulary Vocabulary::numbered(std::uint32_t size) {
  std::vector<std::string> words;
  words.reserve(size);
  for (std::uint32_t i = 0; i < size; ++i) words.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(words));
}

Corpus::Corpus(std::vector<Document> documents, Vocabulary vocabulary)
    : documents_(std::move(documents)), vocabulary_(std::move(vocabulary)) {
  const auto v = vocabulary_.size();
  for (std::size_t j = 0; j < documents_.size(); ++j) {
    for (WordId w : documents_[j].tokens) {
      if (w >= v) {
        throw InputError("corpus: document " + std::to_string(j) + " has word id " + std::to_string(w) +
                         " >= V=" + std::to_string(v));
      }
    }
  }
}

std::size_t Corpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto& d : documents_) n += d.tokens.size();
  return n;
}

std::vector<std::uint32_t> Corpus::document_lengths() const {
  std::vector<std::uint32_t> out;
  out.reserve(documents_.size());
  for (const auto& d : documents_) out.push_back(static_cast<std::uint32_t>(d.tokens.size()));
  return out;
}

double Corpus::mean_document_length() const {
  if (documents_.empty()) return 0.0;
  return static_cast<double>(num_tokens()) / static_cast<double>(documents_.size());
}

// ---------------------------------------------------------------------------

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

Corpus ingest_text(std::istream& lines, const IngestOptions& options) {
  if (!lines) throw InputError("ingest_text: stream is not readable");
  Vocabulary vocab;
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    Document doc;
    doc.label = "line:" + std::to_string(line_no);
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && !is_word_byte(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && is_word_byte(static_cast<unsigned char>(line[i]))) ++i;
      if (i == start) continue;
      std::string tok = line.substr(start, i - start);
      if (tok.size() < options.min_token_length) continue;
      if (options.lowercase) {
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      doc.tokens.push_back(vocab.intern(tok));
    }
    if (!doc.tokens.empty() || options.keep_empty_documents) docs.push_back(std::move(doc));
  }
  if (lines.bad()) throw InputError("ingest_text: read failure");
  const bool any_tokens = std::any_of(docs.begin(), docs.end(), [](const Document& d) { return !d.tokens.empty(); });
  if (!any_tokens) throw EmptyCorpusError("ingest_text: no non-empty documents");
  return Corpus(std::move(docs), std::move(vocab));
}

Corpus ingest_text(const std::vector<std::string>& lines, const IngestOptions& options) {
  std::ostringstream joined;
  for (const auto& l : lines) joined << l << '\n';
  std::istringstream in(joined.str());
  return ingest_text(in, options);
}

Corpus load_bow(const std::vector<BowRecord>& records, std::uint32_t vocab_size) {
  if (records.empty()) throw EmptyCorpusError("load_bow: no records");
  std::map<std::uint64_t, std::map<WordId, std::int64_t>> docs;
  for (const auto& r : records) {
    if (r.word >= vocab_size) {
      throw FormatError("load_bow: word id " + std::to_string(r.word) + " >= V=" + std::to_string(vocab_size));
    }
    if (r.count <= 0) throw FormatError("load_bow: non-positive count for doc " + std::to_string(r.doc));
    docs[r.doc][r.word] += r.count;
  }
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& [doc_id, words] : docs) {
    Document d;
    d.label = "doc:" + std::to_string(doc_id);
    for (const auto& [w, c] : words) d.tokens.insert(d.tokens.end(), static_cast<std::size_t>(c), w);
    out.push_back(std::move(d));
  }
  return Corpus(std::move(out), Vocabulary::numbered(vocab_size));
}

Corpus read_bow(std::istream& in) {
  if (!in) throw InputError("read_bow: stream is not readable");
  std::string line;
  std::uint64_t vocab_size = 0, num_docs = 0;
  if (!std::getline(in, line)) throw FormatError("read_bow: missing header");
  {
    std::istringstream hs(line);
    if (!(hs >> vocab_size >> num_docs)) throw FormatError("read_bow: header must be 'V N_DOCS'");
  }
  std::vector<BowRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::uint64_t doc = 0;
    std::int64_t word = 0, count = 0;
    if (!(ls >> doc >> word >> count)) throw FormatError("read_bow: bad triple on line " + std::to_string(line_no));
    if (word < 0 || static_cast<std::uint64_t>(word) >= vocab_size) {
      throw FormatError("read_bow: word id out of range on line " + std::to_string(line_no));
    }
    if (doc >= num_docs) throw FormatError("read_bow: doc id out of range on line " + std::to_string(line_no));
    records.push_back({doc, static_cast<WordId>(word), count});
  }
  if (in.bad()) throw InputError("read_bow: read failure");
  return load_bow(records, static_cast<std::uint32_t>(vocab_size));
}

void write_bow(std::ostream& out, const Corpus& corpus) {
  out << corpus.vocab_size() << ' ' << corpus.num_documents() << '\n';
  for (std::size_t j = 0; j < corpus.num_documents(); ++j) {
    std::map<WordId, std::uint64_t> counts;
    for (WordId w : corpus.document(j).tokens) ++counts[w];
    for (const auto& [w, c] : counts) out << j << ' ' << w << ' ' << c << '\n';
  }
}

Vocabulary read_vocabulary(std::istream& in) {
  if (!in) throw InputError("read_vocabulary: stream is not readable");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    words.push_back(line);
  }
  return Vocabulary(std::move(words));
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& w : vocab.words()) out << w << '\n';
}

// ---------------------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (grid < 2) throw SpecError("synthetic: grid side must be >= 2");
  if (num_super < 1) throw SpecError("synthetic: need at least one super-topic");
  if (num_sub < 1) throw SpecError("synthetic: need at least one sub-topic");
  if (num_sub > 2 * grid) {
    throw SpecError("synthetic: " + std::to_string(num_sub) + " sub-topics exceed the " + std::to_string(2 * grid) +
                    " rows and columns of a " + std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  }
  if (num_docs < 1) throw SpecError("synthetic: need at least one document");
  if (doc_length < 1) throw SpecError("synthetic: document length must be >= 1");
  if (!(root_dirichlet > 0.0) || !(super_dirichlet > 0.0)) throw SpecError("synthetic: Dirichlet concentrations must be positive");
}

std::size_t GroundTruth::num_tokens() const {
  std::size_t n = 0;
  for (const auto& d : labels) n += d.size();
  return n;
}

Vocabulary grid_vocabulary(std::uint32_t grid) {
  std::vector<std::string> words;
  words.reserve(static_cast<std::size_t>(grid) * grid);
  for (std::uint32_t r = 0; r < grid; ++r)
    for (std::uint32_t c = 0; c < grid; ++c) words.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
  return Vocabulary(std::move(words));
}

std::vector<WordId> grid_line_cells(std::uint32_t grid, GridLine line) {
  std::vector<WordId> cells;
  cells.reserve(grid);
  for (std::uint32_t i = 0; i < grid; ++i) {
    cells.push_back(line.is_row ? line.index * grid + i : i * grid + line.index);
  }
  return cells;
}

std::pair<Corpus, GroundTruth> generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  const std::uint32_t v = spec.grid;
  const std::uint32_t vocab = v * v;

  // Rows 0..v-1 then columns 0..v-1; partial Fisher-Yates picks s3 of them.
  std::vector<GridLine> lines;
  for (std::uint32_t i = 0; i < v; ++i) lines.push_back({true, i});
  for (std::uint32_t i = 0; i < v; ++i) lines.push_back({false, i});
  for (std::uint32_t i = 0; i < spec.num_sub; ++i) {
    const auto span = static_cast<std::uint32_t>(lines.size()) - i;
    const auto pick = i + static_cast<std::uint32_t>(uniform01(rng) * span);
    std::swap(lines[i], lines[std::min(pick, static_cast<std::uint32_t>(lines.size()) - 1)]);
  }
  lines.resize(spec.num_sub);

  // Each super-topic takes a uniform nonempty subset; redraw the whole
  // structure until every sub-topic is reachable.
  std::vector<std::vector<std::uint32_t>> children;
  for (;;) {
    children.assign(spec.num_super, {});
    std::vector<bool> covered(spec.num_sub, false);
    for (auto& set : children) {
      do {
        set.clear();
        for (std::uint32_t s = 0; s < spec.num_sub; ++s)
          if (uniform01(rng) < 0.5) set.push_back(s);
      } while (set.empty());
      for (auto s : set) covered[s] = true;
    }
    if (std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) break;
  }

  PamModel model;
  model.num_super = spec.num_super;
  model.num_sub = spec.num_sub;
  model.root_alpha.assign(spec.num_super, spec.root_dirichlet);
  model.super_alpha.assign(spec.num_super, std::vector<double>(spec.num_sub, 0.0));
  for (std::uint32_t l = 0; l < spec.num_super; ++l)
    for (auto s : children[l]) model.super_alpha[l][s] = spec.super_dirichlet;

  std::vector<std::vector<double>> word_dists(spec.num_sub, std::vector<double>(vocab, 0.0));
  for (std::uint32_t s = 0; s < spec.num_sub; ++s)
    for (WordId w : grid_line_cells(v, lines[s])) word_dists[s][w] = 1.0 / v;

  auto [corpus, truth] = pam_generate(model, word_dists, spec.num_docs, spec.doc_length, rng, grid_vocabulary(v));
  truth.sub_topics = lines;
  truth.super_topics = children;
  return {std::move(corpus), std::move(truth)};
}

void sort_tokens_by_word(Corpus& corpus, GroundTruth& truth) {
  if (truth.labels.size() != corpus.num_documents()) throw InputError("sort_tokens_by_word: truth/corpus document mismatch");
  std::vector<Document> docs = corpus.documents();
  for (std::size_t j = 0; j < docs.size(); ++j) {
    auto& toks = docs[j].tokens;
    auto& labs = truth.labels[j];
    if (toks.size() != labs.size()) throw InputError("sort_tokens_by_word: truth/corpus token mismatch");
    std::vector<std::size_t> order(toks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return toks[a] < toks[b]; });
    std::vector<WordId> t2;
    std::vector<TopicPair> l2;
    for (auto i : order) {
      t2.push_back(toks[i]);
      l2.push_back(labs[i]);
    }
    toks = std::move(t2);
    labs = std::move(l2);
  }
  corpus = Corpus(std::move(docs), corpus.vocabulary());
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  out << "subtopics " << truth.sub_topics.size() << '\n';
  for (std::size_t s = 0; s < truth.sub_topics.size(); ++s) {
    out << "sub " << s << ' ' << (truth.sub_topics[s].is_row ? "row" : "col") << ' ' << truth.sub_topics[s].index << '\n';
  }
  out << "supertopics " << truth.super_topics.size() << '\n';
  for (std::size_t l = 0; l < truth.super_topics.size(); ++l) {
    out << "super " << l << ' ' << truth.super_topics[l].size();
    for (auto c : truth.super_topics[l]) out << ' ' << c;
    out << '\n';
  }
  out << "tokens " << truth.num_tokens() << '\n';
  for (std::size_t j = 0; j < truth.labels.size(); ++j)
    for (std::size_t i = 0; i < truth.labels[j].size(); ++i)
      out << j << ' ' << i << ' ' << truth.labels[j][i].super_topic << ' ' << truth.labels[j][i].sub_topic << '\n';
}

GroundTruth read_ground_truth(std::istream& in) {
  if (!in) throw InputError("read_ground_truth: stream is not readable");
  GroundTruth truth;
  std::string key;
  std::size_t n = 0;
  auto expect = [&](const char* want) {
    if (!(in >> key) || key != want) throw FormatError(std::string("ground truth: expected '") + want + "'");
  };
  expect("subtopics");
  if (!(in >> n)) throw FormatError("ground truth: bad subtopic count");
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t id = 0;
    std::string kind;
    std::uint32_t index = 0;
    expect("sub");
    if (!(in >> id >> kind >> index) || id != s || (kind != "row" && kind != "col")) throw FormatError("ground truth: bad sub line");
    truth.sub_topics.push_back({kind == "row", index});
  }
  expect("supertopics");
  if (!(in >> n)) throw FormatError("ground truth: bad supertopic count");
  for (std::size_t l = 0; l < n; ++l) {
    std::size_t id = 0, k = 0;
    expect("super");
    if (!(in >> id >> k) || id != l) throw FormatError("ground truth: bad super line");
    std::vector<std::uint32_t> kids(k);
    for (auto& c : kids)
      if (!(in >> c)) throw FormatError("ground truth: bad super children");
    truth.super_topics.push_back(std::move(kids));
  }
  expect("tokens");
  if (!(in >> n)) throw FormatError("ground truth: bad token count");
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t j = 0, i = 0;
    TopicPair p{};
    if (!(in >> j >> i >> p.super_topic >> p.sub_topic)) throw FormatError("ground truth: truncated token table");
    if (j >= truth.labels.size()) {
      if (j != truth.labels.size()) throw FormatError("ground truth: documents out of order");
      truth.labels.emplace_back();
    }
    if (i != truth.labels[j].size()) throw FormatError("ground truth: tokens out of order");
    truth.labels[j].push_back(p);
  }
  return truth;
}

// ---------------------------------------------------------------------------

std::vector<Fold> split_folds(const Corpus& corpus, std::uint32_t k, Rng& rng) {
  if (k < 2) throw SplitError("split_folds: need at least 2 folds");
  const std::size_t n = corpus.num_documents();
  if (n < k) {
    throw SplitError("split_folds: " + std::to_string(n) + " documents cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto pick = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i)), i - 1);
    std::swap(order[i - 1], order[pick]);
  }
  std::vector<std::vector<std::size_t>> members(k);
  std::size_t pos = 0;
  for (std::uint32_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    members[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(members[f].begin(), members[f].end());
    pos += size;
  }
  std::vector<Fold> folds;
  folds.reserve(k);
  for (std::uint32_t f = 0; f < k; ++f) {
    std::vector<bool> in_test(n, false);
    for (auto j : members[f]) in_test[j] = true;
    std::vector<Document> train, test;
    for (std::size_t j = 0; j < n; ++j) (in_test[j] ? test : train).push_back(corpus.document(j));
    folds.push_back({Corpus(std::move(train), corpus.vocabulary()), Corpus(std::move(test), corpus.vocabulary()), members[f]});
  }
  return folds;
}

}  // namespace npam
