#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "npam/corpus.hpp"
#include "npam/generate.hpp"
#include "npam/npam_sampler.hpp"
#include "npam/random.hpp"

namespace npam {

// Fixed four-level PAM: root -> s2 super-topics -> s3 sub-topics -> words.
// A zero entry of super_alpha removes that super->sub edge (used for the
// sparse synthetic structures); every row needs one positive entry.
struct PamModel {
  std::uint32_t num_super = 1;
  std::uint32_t num_sub = 1;
  std::vector<double> root_alpha;                // length s2
  std::vector<std::vector<double>> super_alpha;  // s2 x s3
  double beta = 0.01;

  void validate() const;
  static PamModel symmetric(std::uint32_t s2, std::uint32_t s3, double root_alpha, double super_alpha, double beta);
};

// Per document: one root multinomial and one multinomial per super-topic,
// then a (super, sub) path and a word for every token.
std::pair<Corpus, GroundTruth> pam_generate(const PamModel& model, const std::vector<std::vector<double>>& word_dists,
                                            std::uint32_t n_docs, std::uint32_t doc_len, Rng& rng,
                                            Vocabulary vocabulary = {});

struct PamConfig {
  std::uint32_t num_super = 5;
  std::uint32_t num_sub = 100;
  double root_alpha = 0.01;   // per component
  double super_alpha = 0.01;  // per child
  double beta = 0.01;

  void validate() const;
  friend bool operator==(const PamConfig&, const PamConfig&) = default;
};

class PamSnapshot {
 public:
  std::uint64_t sweep = 0;
  std::uint64_t seed = 0;
  PamConfig config;
  std::uint32_t vocab_size = 0;
  std::vector<std::vector<std::uint32_t>> doc_super;      // [doc][super]
  std::vector<std::vector<std::uint32_t>> doc_super_sub;  // [doc][super * s3 + sub]
  std::vector<std::vector<std::uint32_t>> sub_word;       // [sub][word]
  std::vector<std::uint32_t> sub_totals;
  std::vector<std::vector<std::uint64_t>> super_sub;      // corpus-wide [super][sub] token counts
  TokenAssignments assignments;

  std::vector<double> super_mixture(std::uint32_t doc) const;
  std::vector<double> sub_mixture(std::uint32_t doc, std::uint32_t super_topic) const;
  std::vector<double> word_distribution(std::uint32_t sub_topic) const;

  friend bool operator==(const PamSnapshot&, const PamSnapshot&) = default;
};

// Collapsed Gibbs over (super, sub) pairs per token.
class PamChain {
 public:
  PamChain(const Corpus& corpus, const PamConfig& config, std::uint64_t seed);

  void initialize();
  void sweep();
  // Unnormalized weights over all s2 * s3 pairs (index super * s3 + sub) for
  // the token, with its own assignment removed from the counts.
  std::vector<double> token_conditional(std::uint32_t doc, std::uint32_t pos) const;
  PamSnapshot snapshot() const;
  std::uint64_t sweeps_done() const { return sweeps_; }
  const TokenAssignments& assignments() const { return z_; }

 private:
  void add(std::uint32_t doc, std::uint32_t word, TopicPair z, int delta);
  void fill_weights(std::uint32_t doc, std::uint32_t word, std::vector<double>& out) const;

  const Corpus* corpus_;
  PamConfig config_;
  std::uint64_t seed_;
  Rng rng_;
  TokenAssignments z_;
  std::vector<std::vector<std::uint32_t>> doc_super_;
  std::vector<std::vector<std::uint32_t>> doc_super_sub_;
  std::vector<std::vector<std::uint32_t>> sub_word_;
  std::vector<std::uint32_t> sub_totals_;
  std::vector<double> weights_;
  std::uint64_t sweeps_ = 0;
};

std::vector<PamSnapshot> pam_train(const Corpus& corpus, const PamConfig& config, const TrainConfig& train_config);

// Fresh document from the fixed-structure process: root and per-super
// multinomials drawn from their Dirichlet priors, words from the learned
// smoothed sub-topic distributions.
class PamGenerator final : public DocumentGenerator {
 public:
  explicit PamGenerator(PamSnapshot snapshot);
  Document generate(std::uint32_t length, Rng& rng) const override;
  std::uint32_t vocab_size() const override { return snap_.vocab_size; }
  double beta() const override { return snap_.config.beta; }

 private:
  PamSnapshot snap_;
  std::vector<std::vector<double>> word_cdf_;
};

Document pam_generate_document(const PamSnapshot& snapshot, std::uint32_t length, Rng& rng);

std::string pam_snapshot_to_json(const PamSnapshot& snapshot);
PamSnapshot pam_snapshot_from_json(std::string_view text);

}  // namespace npam
