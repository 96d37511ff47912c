#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npam/corpus.hpp"
#include "npam/generate.hpp"
#include "npam/matching.hpp"
#include "npam/pam.hpp"
#include "npam/random.hpp"
#include "npam/snapshot.hpp"

namespace npam {

// ---- empirical likelihood -------------------------------------------------

struct LikelihoodReport {
  std::vector<double> fold_log_likelihood;             // summed over the fold's test documents
  double mean_log_likelihood = 0.0;
  std::vector<std::vector<double>> doc_log_likelihood;  // [fold][test doc]
  std::uint32_t n_generated = 0;
  std::uint32_t pseudo_len = 0;
  std::uint64_t dropped_tokens = 0;  // test tokens outside the model vocabulary
  std::uint64_t scored_tokens = 0;
};

// Scores every test document against a mixture of smoothed multinomials, one
// per generated pseudo-document. Returns a single-fold report.
LikelihoodReport empirical_likelihood(const DocumentGenerator& model, const Corpus& test, std::uint32_t n_generated,
                                      std::uint32_t pseudo_len, double beta, Rng& rng);

// Concatenates single-fold reports and recomputes the mean.
LikelihoodReport combine_folds(const std::vector<LikelihoodReport>& folds);

// Emits every word with equal probability; the reference point for the
// estimator's sanity checks.
class UniformGenerator final : public DocumentGenerator {
 public:
  UniformGenerator(std::uint32_t vocab_size, double beta);
  Document generate(std::uint32_t length, Rng& rng) const override;
  std::uint32_t vocab_size() const override { return vocab_; }
  double beta() const override { return beta_; }

 private:
  std::uint32_t vocab_;
  double beta_;
};

std::string format_likelihood_report(const LikelihoodReport& report);

// ---- structure recovery ---------------------------------------------------

struct LevelMatching {
  std::vector<std::vector<std::int64_t>> contingency;    // [true][discovered] shared tokens
  std::vector<std::optional<std::uint32_t>> partner;      // true -> discovered
  std::int64_t weight = 0;
};

struct TopicMatching {
  LevelMatching super_level;
  LevelMatching sub_level;
};

LevelMatching match_level(std::vector<std::vector<std::int64_t>> contingency);
TopicMatching match_topics(const GroundTruth& truth, const TokenAssignments& assignments);

struct AccuracyReport {
  double super_accuracy = 0.0;  // percent
  double sub_accuracy = 0.0;    // percent
  std::vector<std::optional<std::uint32_t>> super_matching;
  std::vector<std::optional<std::uint32_t>> sub_matching;
  // Discovered topics holding tokens but left unmatched.
  std::uint32_t super_splits = 0;
  std::uint32_t sub_splits = 0;
  // True topics whose largest overlap is with a topic matched to another true topic.
  std::uint32_t super_merges = 0;
  std::uint32_t sub_merges = 0;
};

AccuracyReport structure_accuracy(const GroundTruth& truth, const TokenAssignments& assignments,
                                  const TopicMatching& matching);
AccuracyReport score_structure(const GroundTruth& truth, const TokenAssignments& assignments);

// Mean accuracies and split/merge counts over several samples; the matching
// reported is the first sample's.
struct AveragedAccuracy {
  double super_accuracy = 0.0;
  double sub_accuracy = 0.0;
  double super_splits = 0.0;
  double sub_splits = 0.0;
  double super_merges = 0.0;
  double sub_merges = 0.0;
  std::vector<AccuracyReport> samples;
};

AveragedAccuracy average_accuracy(std::vector<AccuracyReport> samples);
std::string format_accuracy_report(const AveragedAccuracy& report);

// ---- topic export ---------------------------------------------------------

struct WordProb {
  WordId word = 0;
  double prob = 0.0;
};

struct EdgeShare {
  std::uint32_t sub_topic = 0;
  double share = 0.0;
};

struct TopicReport {
  struct SubTopic {
    std::uint32_t id = 0;
    std::uint64_t tokens = 0;
    std::vector<WordProb> top_words;
  };
  struct SuperTopic {
    std::uint32_t id = 0;
    std::vector<EdgeShare> children;
  };
  std::vector<SubTopic> sub_topics;
  std::vector<SuperTopic> super_topics;
  std::uint32_t num_super = 0;
  std::uint32_t num_sub = 0;
  double mean_children = 0.0;
};

// Edge shares: fraction of the super-topic's menus serving each sub-topic.
TopicReport export_topics(const TopicSnapshot& snapshot, std::uint32_t top_n);
// Edge shares: fraction of the super-topic's tokens on each sub-topic.
TopicReport export_topics(const PamSnapshot& snapshot, std::uint32_t top_n);

std::string format_topic_report(const TopicReport& report, const Vocabulary& vocab);

}  // namespace npam
