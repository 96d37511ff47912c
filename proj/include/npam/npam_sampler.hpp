#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "npam/corpus.hpp"
#include "npam/random.hpp"
#include "npam/seating.hpp"

namespace npam {

// Concentrations of the five restaurant processes (entryway, category,
// table, menu, dish) and the symmetric Dirichlet smoothing of dish word
// distributions.
struct Hyperparams {
  double alpha0 = 0.1;
  double gamma0 = 1.0;
  double alpha1 = 1.0;
  double gamma1 = 1.0;
  double phi1 = 10.0;
  double beta = 0.01;

  void validate() const;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct GammaPrior {
  double shape = 1.0;
  double scale = 1.0;
  double mean() const { return shape * scale; }
  friend bool operator==(const GammaPrior&, const GammaPrior&) = default;
};

struct GammaPriors {
  GammaPrior alpha0{1.0, 0.1};
  GammaPrior gamma0{1.0, 1.0};
  GammaPrior alpha1{1.0, 1.0};
  GammaPrior gamma1{1.0, 1.0};
  GammaPrior phi1{1.0, 10.0};
  double beta = 0.01;

  void validate() const;
  // Starting point for a chain: every concentration at its prior mean.
  Hyperparams prior_means() const;
};

struct TrainConfig {
  std::uint32_t burn_in = 1000;
  std::uint32_t n_samples = 10;
  std::uint32_t sample_lag = 100;
  std::uint64_t seed = 0;
  bool resample_hyperparams = true;

  void validate() const;
  std::uint64_t total_sweeps() const { return burn_in + static_cast<std::uint64_t>(n_samples) * sample_lag; }
};

// ---------------------------------------------------------------------------
// Conditional blocks. Weights are the normalized CRP products of the
// respective block, so each candidate list sums to one.

struct SuperCandidate {
  Choice<EntrywayId> entryway;
  Choice<CategoryId> category;
  double weight = 0.0;
};

// Existing entryways of `doc`, then a new entryway on each existing category,
// then a new entryway on a new category.
std::vector<SuperCandidate> super_topic_candidates(const SeatingState& state, std::uint32_t doc, const Hyperparams& hp);

struct SubCandidate {
  Choice<TableId> table;
  Choice<MenuId> menu;
  Choice<DishId> dish;
  double weight = 0.0;
};

// Tables of the (doc, category) section, then a new table on each menu of the
// category, then a new table and menu on each dish, then all new. A new
// category (nullopt) has no tables or menus.
std::vector<SubCandidate> sub_topic_candidates(const SeatingState& state, std::uint32_t doc,
                                               std::optional<CategoryId> category, const Hyperparams& hp);

// Smoothed predictive (C(m,x) + beta) / (C(m) + V beta); 1/V for a new dish.
double word_likelihood(const SeatingState& state, std::optional<DishId> dish, std::uint32_t word, double beta);

struct JointCandidate {
  FullPath path;
  double weight = 0.0;
};

// Explicit product of the three blocks over every consistent 5-tuple,
// unnormalized, in canonical order.
std::vector<JointCandidate> joint_candidates(const SeatingState& state, std::uint32_t doc, std::uint32_t word,
                                             const Hyperparams& hp);

// Exact joint conditional over full paths for a word arriving at `doc`,
// computed the way resample_token samples it: per-category sums of the
// table/menu/dish block times the word likelihood, then the entryway block.
// The returned weights are normalized.
std::vector<JointCandidate> conditional_distribution(const SeatingState& state, std::uint32_t doc, std::uint32_t word,
                                                     const Hyperparams& hp);

// Draws a full path for a word arriving at `doc` from the joint conditional.
// Reuses scratch buffers across calls; one sampler per chain.
class PathSampler {
 public:
  FullPath sample(const SeatingState& state, std::uint32_t doc, std::uint32_t word, const Hyperparams& hp, Rng& rng);
  // Path drawn from the restaurant process alone, ignoring the word.
  FullPath sample_prior(const SeatingState& state, std::uint32_t doc, const Hyperparams& hp, Rng& rng);

  // Fills the per-category and per-candidate masses for (doc, word); exposed
  // for conditional_distribution.
  void prepare(const SeatingState& state, std::uint32_t doc, std::uint32_t word, const Hyperparams& hp);

  struct SuperMass {
    Choice<EntrywayId> entryway;
    Choice<CategoryId> category;
    double mass;  // entryway block times the category's summed lower blocks
  };
  const std::vector<SuperMass>& super_masses() const { return super_; }
  // Lower-block candidates (with word likelihood folded in) for one category.
  std::vector<SubCandidate> lower_candidates(const SeatingState& state, std::uint32_t doc,
                                             std::optional<CategoryId> category, const Hyperparams& hp) const;

 private:
  double category_mass(const SeatingState& state, std::uint32_t doc, CategoryId category, const Hyperparams& hp) const;

  std::vector<double> dish_like_;  // word likelihood per dish slot
  double new_dish_like_ = 0.0;
  double new_menu_mass_ = 0.0;     // sum over dish choices for a new menu, times likelihood
  std::vector<double> cat_mass_;   // per category slot
  std::vector<SuperMass> super_;
  std::vector<double> weights_;
};

// Unseats the token, draws a path from the joint conditional, reseats it.
void resample_token(SeatingState& state, TokenRef token, const Hyperparams& hp, PathSampler& sampler, Rng& rng);

// One pass over every token in document order, then token order.
void gibbs_sweep(SeatingState& state, const Hyperparams& hp, PathSampler& sampler, Rng& rng);

// Seats every token of the corpus in order, each from its joint conditional
// given the tokens already seated.
SeatingState initialize_state(const Corpus& corpus, const Hyperparams& hp, PathSampler& sampler, Rng& rng);

// Auxiliary-variable Gibbs update of every concentration under its Gamma
// prior, iterated `iterations` times. beta is copied from the priors.
Hyperparams resample_hyperparams(const SeatingState& state, const Hyperparams& current, const GammaPriors& priors,
                                 Rng& rng, int iterations = 5);

// A DP concentration update for groups of sizes `group_sizes` that together
// hold `components` clusters. Returns a prior draw when there are no groups.
double resample_concentration(double current, const std::vector<std::uint64_t>& group_sizes, std::uint64_t components,
                              const GammaPrior& prior, Rng& rng, int iterations);

// ---------------------------------------------------------------------------

struct StructureTrace {
  std::uint64_t sweep = 0;
  std::uint32_t num_super = 0;
  std::uint32_t num_sub = 0;
};

class TopicSnapshot;

// One collapsed Gibbs chain over a corpus.
class NpamChain {
 public:
  NpamChain(const Corpus& corpus, const GammaPriors& priors, const TrainConfig& config);

  void initialize();
  void sweep();

  const SeatingState& state() const { return state_; }
  const Hyperparams& hyperparams() const { return hp_; }
  std::uint64_t sweeps_done() const { return sweeps_; }
  TopicSnapshot snapshot() const;

 private:
  const Corpus* corpus_;
  GammaPriors priors_;
  TrainConfig config_;
  Hyperparams hp_;
  Rng rng_;
  PathSampler sampler_;
  SeatingState state_;
  std::uint64_t sweeps_ = 0;
};

using SweepCallback = std::function<void(const NpamChain&)>;

// Full schedule: initialization, burn_in sweeps, then n_samples snapshots
// every sample_lag sweeps. `on_sweep` sees the chain after each sweep.
std::vector<TopicSnapshot> train(const Corpus& corpus, const TrainConfig& config, const GammaPriors& priors,
                                 const SweepCallback& on_sweep = {});

// Forward simulation of the joint model: paths from the restaurant process,
// words from the collapsed dish predictive. Returns the state and words.
struct ForwardSample {
  SeatingState state;
  std::vector<std::vector<std::uint32_t>> words;
};
ForwardSample forward_simulate(const std::vector<std::uint32_t>& doc_lengths, std::uint32_t vocab_size,
                               const Hyperparams& hp, Rng& rng);

}  // namespace npam
