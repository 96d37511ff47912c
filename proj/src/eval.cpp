#include "npam/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "npam/error.hpp"

namespace npam {

// ---- empirical likelihood -------------------------------------------------

namespace {

// Running log-sum-exp.
struct LogSum {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max) {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    } else {
      sum += std::exp(x - max);
    }
  }
  double value() const { return sum > 0.0 ? max + std::log(sum) : -std::numeric_limits<double>::infinity(); }
};

}  // namespace

LikelihoodReport empirical_likelihood(const DocumentGenerator& model, const Corpus& test, std::uint32_t n_generated,
                                      std::uint32_t pseudo_len, double beta, Rng& rng) {
  if (test.num_documents() == 0) throw EmptyCorpusError("empirical likelihood: empty test set");
  if (n_generated < 1 || pseudo_len < 1) throw ParameterError("empirical likelihood: need n_generated >= 1 and pseudo_len >= 1");
  if (!(beta > 0.0)) throw ParameterError("empirical likelihood: beta must be positive");
  const std::uint32_t vocab = model.vocab_size();

  LikelihoodReport report;
  report.n_generated = n_generated;
  report.pseudo_len = pseudo_len;

  // Inverted index word -> (test doc, count), plus scored length per doc.
  const std::size_t n_docs = test.num_documents();
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings(vocab);
  std::vector<double> doc_len(n_docs, 0.0);
  {
    std::vector<std::uint32_t> counts(vocab, 0);
    for (std::size_t d = 0; d < n_docs; ++d) {
      std::vector<WordId> seen;
      for (WordId x : test.document(d).tokens) {
        if (x >= vocab) {
          ++report.dropped_tokens;
          continue;
        }
        if (counts[x]++ == 0) seen.push_back(x);
      }
      for (WordId x : seen) {
        postings[x].push_back({static_cast<std::uint32_t>(d), counts[x]});
        doc_len[d] += counts[x];
        counts[x] = 0;
      }
      report.scored_tokens += static_cast<std::uint64_t>(doc_len[d]);
    }
  }

  // log q_i(x) = log(beta / (L + V beta)) + log(1 + c_i(x) / beta); only words
  // present in the pseudo-document contribute the second term.
  const double base = std::log(beta / (pseudo_len + vocab * beta));
  std::vector<LogSum> acc(n_docs);
  std::vector<double> score(n_docs);
  std::vector<std::uint32_t> counts(vocab, 0);
  std::vector<WordId> seen;
  for (std::uint32_t i = 0; i < n_generated; ++i) {
    const Document pseudo = model.generate(pseudo_len, rng);
    seen.clear();
    for (WordId x : pseudo.tokens)
      if (counts[x]++ == 0) seen.push_back(x);
    for (std::size_t d = 0; d < n_docs; ++d) score[d] = doc_len[d] * base;
    for (WordId x : seen) {
      const double bonus = std::log1p(counts[x] / beta);
      for (const auto& [d, n] : postings[x]) score[d] += n * bonus;
      counts[x] = 0;
    }
    for (std::size_t d = 0; d < n_docs; ++d) acc[d].add(score[d]);
  }

  const double log_n = std::log(static_cast<double>(n_generated));
  std::vector<double> per_doc(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) per_doc[d] = acc[d].value() - log_n;
  const double total = std::accumulate(per_doc.begin(), per_doc.end(), 0.0);
  report.fold_log_likelihood = {total};
  report.mean_log_likelihood = total;
  report.doc_log_likelihood = {std::move(per_doc)};
  return report;
}

LikelihoodReport combine_folds(const std::vector<LikelihoodReport>& folds) {
  LikelihoodReport out;
  if (folds.empty()) return out;
  out.n_generated = folds.front().n_generated;
  out.pseudo_len = folds.front().pseudo_len;
  for (const auto& f : folds) {
    out.fold_log_likelihood.insert(out.fold_log_likelihood.end(), f.fold_log_likelihood.begin(), f.fold_log_likelihood.end());
    out.doc_log_likelihood.insert(out.doc_log_likelihood.end(), f.doc_log_likelihood.begin(), f.doc_log_likelihood.end());
    out.dropped_tokens += f.dropped_tokens;
    out.scored_tokens += f.scored_tokens;
  }
  out.mean_log_likelihood = std::accumulate(out.fold_log_likelihood.begin(), out.fold_log_likelihood.end(), 0.0) /
                            static_cast<double>(out.fold_log_likelihood.size());
  return out;
}

UniformGenerator::UniformGenerator(std::uint32_t vocab_size, double beta) : vocab_(vocab_size), beta_(beta) {
  if (vocab_size == 0) throw ParameterError("uniform generator: empty vocabulary");
}

Document UniformGenerator::generate(std::uint32_t length, Rng& rng) const {
  Document doc;
  doc.tokens.reserve(length);
  for (std::uint32_t i = 0; i < length; ++i)
    doc.tokens.push_back(static_cast<WordId>(std::min<double>(uniform01(rng) * vocab_, vocab_ - 1)));
  return doc;
}

std::string format_likelihood_report(const LikelihoodReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "folds: " << r.fold_log_likelihood.size() << "\n";
  os << "n_generated: " << r.n_generated << "\n";
  os << "pseudo_len: " << r.pseudo_len << "\n";
  os << "scored_tokens: " << r.scored_tokens << "\n";
  os << "dropped_tokens: " << r.dropped_tokens << "\n";
  for (std::size_t f = 0; f < r.fold_log_likelihood.size(); ++f)
    os << "fold " << f << ": " << r.fold_log_likelihood[f] << "\n";
  os << "mean: " << r.mean_log_likelihood << "\n";
  return os.str();
}

// ---- structure recovery ---------------------------------------------------

LevelMatching match_level(std::vector<std::vector<std::int64_t>> contingency) {
  LevelMatching out;
  const auto a = max_weight_assignment(contingency);
  out.partner = a.row_to_col;
  out.weight = a.weight;
  out.contingency = std::move(contingency);
  return out;
}

namespace {

void check_shapes(const GroundTruth& truth, const TokenAssignments& assignments) {
  if (truth.labels.size() != assignments.size()) throw InputError("structure scoring: document counts differ");
  for (std::size_t j = 0; j < assignments.size(); ++j)
    if (truth.labels[j].size() != assignments[j].size())
      throw InputError("structure scoring: token counts differ in document " + std::to_string(j));
}

std::vector<std::vector<std::int64_t>> contingency(const GroundTruth& truth, const TokenAssignments& assignments,
                                                   bool super_level) {
  std::uint32_t n_true = 0, n_found = 0;
  auto pick = [super_level](const TopicPair& p) { return super_level ? p.super_topic : p.sub_topic; };
  for (std::size_t j = 0; j < assignments.size(); ++j)
    for (std::size_t i = 0; i < assignments[j].size(); ++i) {
      n_true = std::max(n_true, pick(truth.labels[j][i]) + 1);
      n_found = std::max(n_found, pick(assignments[j][i]) + 1);
    }
  n_true = std::max<std::uint32_t>(n_true, super_level ? truth.super_topics.size() : truth.sub_topics.size());
  std::vector<std::vector<std::int64_t>> table(n_true, std::vector<std::int64_t>(n_found, 0));
  for (std::size_t j = 0; j < assignments.size(); ++j)
    for (std::size_t i = 0; i < assignments[j].size(); ++i) ++table[pick(truth.labels[j][i])][pick(assignments[j][i])];
  return table;
}

// (splits, merges) for one level.
std::pair<std::uint32_t, std::uint32_t> splits_and_merges(const LevelMatching& m) {
  const std::size_t n_found = m.contingency.empty() ? 0 : m.contingency.front().size();
  std::vector<int> owner(n_found, -1);
  for (std::size_t t = 0; t < m.partner.size(); ++t)
    if (m.partner[t]) owner[*m.partner[t]] = static_cast<int>(t);
  std::uint32_t splits = 0, merges = 0;
  for (std::size_t k = 0; k < n_found; ++k) {
    if (owner[k] >= 0) continue;
    for (const auto& row : m.contingency)
      if (row[k] > 0) {
        ++splits;
        break;
      }
  }
  for (std::size_t t = 0; t < m.contingency.size(); ++t) {
    const auto& row = m.contingency[t];
    if (row.empty()) continue;
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (row[best] > 0 && owner[best] >= 0 && owner[best] != static_cast<int>(t)) ++merges;
  }
  return {splits, merges};
}

}  // namespace

TopicMatching match_topics(const GroundTruth& truth, const TokenAssignments& assignments) {
  check_shapes(truth, assignments);
  TopicMatching m;
  m.super_level = match_level(contingency(truth, assignments, true));
  m.sub_level = match_level(contingency(truth, assignments, false));
  return m;
}

AccuracyReport structure_accuracy(const GroundTruth& truth, const TokenAssignments& assignments,
                                  const TopicMatching& matching) {
  check_shapes(truth, assignments);
  AccuracyReport r;
  r.super_matching = matching.super_level.partner;
  r.sub_matching = matching.sub_level.partner;
  std::uint64_t total = 0, super_ok = 0, sub_ok = 0;
  auto hit = [](const std::vector<std::optional<std::uint32_t>>& partner, std::uint32_t t, std::uint32_t found) {
    return t < partner.size() && partner[t] && *partner[t] == found;
  };
  for (std::size_t j = 0; j < assignments.size(); ++j)
    for (std::size_t i = 0; i < assignments[j].size(); ++i) {
      ++total;
      super_ok += hit(r.super_matching, truth.labels[j][i].super_topic, assignments[j][i].super_topic);
      sub_ok += hit(r.sub_matching, truth.labels[j][i].sub_topic, assignments[j][i].sub_topic);
    }
  if (total > 0) {
    r.super_accuracy = 100.0 * static_cast<double>(super_ok) / static_cast<double>(total);
    r.sub_accuracy = 100.0 * static_cast<double>(sub_ok) / static_cast<double>(total);
  }
  std::tie(r.super_splits, r.super_merges) = splits_and_merges(matching.super_level);
  std::tie(r.sub_splits, r.sub_merges) = splits_and_merges(matching.sub_level);
  return r;
}

AccuracyReport score_structure(const GroundTruth& truth, const TokenAssignments& assignments) {
  return structure_accuracy(truth, assignments, match_topics(truth, assignments));
}

AveragedAccuracy average_accuracy(std::vector<AccuracyReport> samples) {
  AveragedAccuracy out;
  if (samples.empty()) return out;
  for (const auto& s : samples) {
    out.super_accuracy += s.super_accuracy;
    out.sub_accuracy += s.sub_accuracy;
    out.super_splits += s.super_splits;
    out.sub_splits += s.sub_splits;
    out.super_merges += s.super_merges;
    out.sub_merges += s.sub_merges;
  }
  const double n = static_cast<double>(samples.size());
  out.super_accuracy /= n;
  out.sub_accuracy /= n;
  out.super_splits /= n;
  out.sub_splits /= n;
  out.super_merges /= n;
  out.sub_merges /= n;
  out.samples = std::move(samples);
  return out;
}

namespace {

std::string matching_line(const std::vector<std::optional<std::uint32_t>>& partner) {
  std::ostringstream os;
  for (std::size_t t = 0; t < partner.size(); ++t) {
    if (t) os << ' ';
    os << t << "->";
    if (partner[t])
      os << *partner[t];
    else
      os << '-';
  }
  return os.str();
}

}  // namespace

std::string format_accuracy_report(const AveragedAccuracy& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "samples: " << r.samples.size() << "\n";
  os << "super_accuracy: " << r.super_accuracy << "\n";
  os << "sub_accuracy: " << r.sub_accuracy << "\n";
  os << "super_splits: " << r.super_splits << "\n";
  os << "sub_splits: " << r.sub_splits << "\n";
  os << "super_merges: " << r.super_merges << "\n";
  os << "sub_merges: " << r.sub_merges << "\n";
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    const auto& a = r.samples[s];
    os << "sample " << s << ": super " << a.super_accuracy << " sub " << a.sub_accuracy << "\n";
    os << "  super matching: " << matching_line(a.super_matching) << "\n";
    os << "  sub matching: " << matching_line(a.sub_matching) << "\n";
  }
  return os.str();
}

// ---- topic export ---------------------------------------------------------

namespace {

std::vector<WordProb> top_words(const std::vector<double>& dist, std::uint32_t top_n) {
  std::vector<WordId> order(dist.size());
  std::iota(order.begin(), order.end(), 0u);
  const auto n = std::min<std::size_t>(top_n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](WordId a, WordId b) { return dist[a] > dist[b] || (dist[a] == dist[b] && a < b); });
  std::vector<WordProb> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({order[i], dist[order[i]]});
  return out;
}

template <typename Row>
TopicReport::SuperTopic shares(std::uint32_t id, const Row& row) {
  TopicReport::SuperTopic s;
  s.id = id;
  double total = 0.0;
  for (auto c : row) total += static_cast<double>(c);
  for (std::uint32_t m = 0; m < row.size(); ++m)
    if (row[m] > 0) s.children.push_back({m, static_cast<double>(row[m]) / total});
  return s;
}

void finish(TopicReport& r) {
  r.num_super = static_cast<std::uint32_t>(r.super_topics.size());
  r.num_sub = static_cast<std::uint32_t>(r.sub_topics.size());
  double children = 0.0;
  for (const auto& s : r.super_topics) children += static_cast<double>(s.children.size());
  r.mean_children = r.num_super ? children / r.num_super : 0.0;
}

}  // namespace

TopicReport export_topics(const TopicSnapshot& snapshot, std::uint32_t top_n) {
  if (top_n < 1) throw ParameterError("export: top_n must be >= 1");
  TopicReport r;
  for (std::uint32_t m = 0; m < snapshot.num_sub; ++m)
    r.sub_topics.push_back({m, snapshot.sub_totals[m], top_words(snapshot.word_distribution(m), top_n)});
  const auto conn = snapshot.connectivity();
  for (std::uint32_t l = 0; l < snapshot.num_super; ++l) r.super_topics.push_back(shares(l, conn[l]));
  finish(r);
  return r;
}

TopicReport export_topics(const PamSnapshot& snapshot, std::uint32_t top_n) {
  if (top_n < 1) throw ParameterError("export: top_n must be >= 1");
  TopicReport r;
  for (std::uint32_t m = 0; m < snapshot.config.num_sub; ++m)
    r.sub_topics.push_back({m, snapshot.sub_totals[m], top_words(snapshot.word_distribution(m), top_n)});
  for (std::uint32_t l = 0; l < snapshot.config.num_super; ++l) r.super_topics.push_back(shares(l, snapshot.super_sub[l]));
  finish(r);
  return r;
}

std::string format_topic_report(const TopicReport& r, const Vocabulary& vocab) {
  auto name = [&](WordId x) { return x < vocab.size() ? vocab.word(x) : "w" + std::to_string(x); };
  std::ostringstream os;
  os << "super_topics: " << r.num_super << "\n";
  os << "sub_topics: " << r.num_sub << "\n";
  os << std::fixed << std::setprecision(2) << "mean_children: " << r.mean_children << "\n";
  os << std::setprecision(5);
  for (const auto& s : r.sub_topics) {
    os << "\nsub " << s.id << " (" << s.tokens << " tokens)\n";
    for (const auto& w : s.top_words) os << "  " << std::left << std::setw(16) << name(w.word) << ' ' << w.prob << "\n";
  }
  for (const auto& s : r.super_topics) {
    os << "\nsuper " << s.id << " (" << s.children.size() << " children)\n";
    for (const auto& c : s.children) os << "  sub " << std::setw(5) << c.sub_topic << ' ' << c.share << "\n";
  }
  return os.str();
}

}  // namespace npam
