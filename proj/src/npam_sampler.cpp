#include "npam/npam_sampler.hpp"

#include <cmath>
#include <limits>

#include "npam/error.hpp"
#include "npam/snapshot.hpp"

namespace npam {

void Hyperparams::validate() const {
  for (double v : {alpha0, gamma0, alpha1, gamma1, phi1, beta}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("hyperparameters must be positive and finite");
  }
}

void GammaPriors::validate() const {
  for (const auto* p : {&alpha0, &gamma0, &alpha1, &gamma1, &phi1}) {
    if (!(p->shape > 0.0) || !(p->scale > 0.0)) throw ParameterError("Gamma prior shape and scale must be positive");
  }
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
}

Hyperparams GammaPriors::prior_means() const {
  return Hyperparams{alpha0.mean(), gamma0.mean(), alpha1.mean(), gamma1.mean(), phi1.mean(), beta};
}

void TrainConfig::validate() const {
  if (n_samples < 1) throw ParameterError("train: n_samples must be >= 1");
  if (sample_lag < 1) throw ParameterError("train: sample_lag must be >= 1");
}

// ---------------------------------------------------------------------------

std::vector<SuperCandidate> super_topic_candidates(const SeatingState& state, std::uint32_t doc, const Hyperparams& hp) {
  const auto& rest = state.restaurant(doc);
  const double n = rest.customers;
  const double e_total = static_cast<double>(state.total_entryways());
  const double new_entry = hp.alpha0 / (n + hp.alpha0);

  std::vector<SuperCandidate> out;
  out.reserve(rest.entryways.size() + state.categories().size() + 1);
  for (auto e : rest.entryways) {
    const auto& ent = state.entryway(e);
    out.push_back({Choice<EntrywayId>::of(e), Choice<CategoryId>::of(ent.category), ent.customers / (n + hp.alpha0)});
  }
  for (auto c : state.categories()) {
    out.push_back({Choice<EntrywayId>::fresh(), Choice<CategoryId>::of(c),
                   new_entry * state.category(c).entryways / (e_total + hp.gamma0)});
  }
  out.push_back({Choice<EntrywayId>::fresh(), Choice<CategoryId>::fresh(), new_entry * hp.gamma0 / (e_total + hp.gamma0)});
  return out;
}

std::vector<SubCandidate> sub_topic_candidates(const SeatingState& state, std::uint32_t doc,
                                               std::optional<CategoryId> category, const Hyperparams& hp) {
  const SeatingState::Section* sec = category ? state.find_section(doc, *category) : nullptr;
  const double n = sec ? sec->customers : 0.0;
  const double tables = category ? state.category(*category).tables : 0.0;
  const double menus = static_cast<double>(state.total_menus());
  const double new_table = hp.alpha1 / (n + hp.alpha1);
  const double new_menu = new_table * hp.gamma1 / (tables + hp.gamma1);

  std::vector<SubCandidate> out;
  if (sec) {
    for (auto t : sec->tables) {
      const auto& tab = state.table(t);
      out.push_back({Choice<TableId>::of(t), Choice<MenuId>::of(tab.menu), Choice<DishId>::of(state.menu(tab.menu).dish),
                     tab.customers / (n + hp.alpha1)});
    }
  }
  if (category) {
    for (auto m : state.category(*category).menus) {
      const auto& men = state.menu(m);
      out.push_back({Choice<TableId>::fresh(), Choice<MenuId>::of(m), Choice<DishId>::of(men.dish),
                     new_table * men.tables / (tables + hp.gamma1)});
    }
  }
  for (auto d : state.dishes()) {
    out.push_back({Choice<TableId>::fresh(), Choice<MenuId>::fresh(), Choice<DishId>::of(d),
                   new_menu * state.dish(d).menus / (menus + hp.phi1)});
  }
  out.push_back({Choice<TableId>::fresh(), Choice<MenuId>::fresh(), Choice<DishId>::fresh(),
                 new_menu * hp.phi1 / (menus + hp.phi1)});
  return out;
}

double word_likelihood(const SeatingState& state, std::optional<DishId> dish, std::uint32_t word, double beta) {
  const double v = state.vocab_size();
  if (!dish) return 1.0 / v;
  const auto& d = state.dish(*dish);
  return (d.word_counts[word] + beta) / (d.customers + v * beta);
}

std::vector<JointCandidate> joint_candidates(const SeatingState& state, std::uint32_t doc, std::uint32_t word,
                                             const Hyperparams& hp) {
  std::vector<JointCandidate> out;
  for (const auto& sc : super_topic_candidates(state, doc, hp)) {
    for (const auto& lc : sub_topic_candidates(state, doc, sc.category.existing, hp)) {
      const double like = word_likelihood(state, lc.dish.existing, word, hp.beta);
      out.push_back({FullPath{sc.entryway, sc.category, lc.table, lc.menu, lc.dish}, sc.weight * lc.weight * like});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kTinyTotal = 1e-300;

}  // namespace

void PathSampler::prepare(const SeatingState& state, std::uint32_t doc, std::uint32_t word, const Hyperparams& hp) {
  const double v = state.vocab_size();
  dish_like_.assign(state.dish_capacity(), 0.0);
  new_dish_like_ = 1.0 / v;
  double dish_sum = 0.0;
  for (auto d : state.dishes()) {
    const auto& dish = state.dish(d);
    const double f = (dish.word_counts[word] + hp.beta) / (dish.customers + v * hp.beta);
    dish_like_[d.slot] = f;
    dish_sum += dish.menus * f;
  }
  new_menu_mass_ = (dish_sum + hp.phi1 * new_dish_like_) / (static_cast<double>(state.total_menus()) + hp.phi1);

  cat_mass_.assign(state.category_capacity(), 0.0);
  for (auto c : state.categories()) cat_mass_[c.slot] = category_mass(state, doc, c, hp);

  const auto& rest = state.restaurant(doc);
  const double n = rest.customers;
  const double e_total = static_cast<double>(state.total_entryways());
  const double new_entry = hp.alpha0 / (n + hp.alpha0);
  super_.clear();
  for (auto e : rest.entryways) {
    const auto& ent = state.entryway(e);
    super_.push_back({Choice<EntrywayId>::of(e), Choice<CategoryId>::of(ent.category),
                      ent.customers / (n + hp.alpha0) * cat_mass_[ent.category.slot]});
  }
  for (auto c : state.categories()) {
    super_.push_back({Choice<EntrywayId>::fresh(), Choice<CategoryId>::of(c),
                      new_entry * state.category(c).entryways / (e_total + hp.gamma0) * cat_mass_[c.slot]});
  }
  super_.push_back({Choice<EntrywayId>::fresh(), Choice<CategoryId>::fresh(),
                    new_entry * hp.gamma0 / (e_total + hp.gamma0) * new_menu_mass_});
}

double PathSampler::category_mass(const SeatingState& state, std::uint32_t doc, CategoryId category,
                                  const Hyperparams& hp) const {
  const auto* sec = state.find_section(doc, category);
  const auto& cat = state.category(category);
  double table_sum = 0.0;
  double n = 0.0;
  if (sec) {
    n = sec->customers;
    for (auto t : sec->tables) {
      const auto& tab = state.table(t);
      table_sum += tab.customers * dish_like_[state.menu(tab.menu).dish.slot];
    }
  }
  double menu_sum = 0.0;
  for (auto m : cat.menus) {
    const auto& men = state.menu(m);
    menu_sum += men.tables * dish_like_[men.dish.slot];
  }
  const double tables = cat.tables;
  return (table_sum + hp.alpha1 * (menu_sum + hp.gamma1 * new_menu_mass_) / (tables + hp.gamma1)) / (n + hp.alpha1);
}

std::vector<SubCandidate> PathSampler::lower_candidates(const SeatingState& state, std::uint32_t doc,
                                                        std::optional<CategoryId> category, const Hyperparams& hp) const {
  auto out = sub_topic_candidates(state, doc, category, hp);
  for (auto& c : out) c.weight *= c.dish.is_new() ? new_dish_like_ : dish_like_[c.dish.id().slot];
  return out;
}

FullPath PathSampler::sample(const SeatingState& state, std::uint32_t doc, std::uint32_t word, const Hyperparams& hp,
                             Rng& rng) {
  prepare(state, doc, word, hp);

  weights_.clear();
  double total = 0.0;
  for (const auto& s : super_) {
    weights_.push_back(s.mass);
    total += s.mass;
  }
  if (total < kTinyTotal) {
    // Rescale before the inverse-CDF scan so the running sum stays normal.
    double top = 0.0;
    for (double w : weights_) top = std::max(top, w);
    total = 0.0;
    for (double& w : weights_) total += (w /= top);
  }
  const auto& pick = super_[sample_index(weights_, total, rng)];

  FullPath path;
  path.entryway = pick.entryway;
  path.category = pick.category;

  // Lower blocks for the chosen category, in canonical order.
  const std::optional<CategoryId> cat = pick.category.existing;
  const SeatingState::Section* sec = cat ? state.find_section(doc, *cat) : nullptr;
  const double n = sec ? sec->customers : 0.0;
  const double tables = cat ? state.category(*cat).tables : 0.0;
  const double menus = static_cast<double>(state.total_menus());
  const double new_table = hp.alpha1 / (n + hp.alpha1);
  const double new_menu = new_table * hp.gamma1 / (tables + hp.gamma1);

  weights_.clear();
  total = 0.0;
  const std::size_t n_tables = sec ? sec->tables.size() : 0;
  const std::size_t n_menus = cat ? state.category(*cat).menus.size() : 0;
  if (sec) {
    for (auto t : sec->tables) {
      const auto& tab = state.table(t);
      const double w = tab.customers / (n + hp.alpha1) * dish_like_[state.menu(tab.menu).dish.slot];
      weights_.push_back(w);
      total += w;
    }
  }
  if (cat) {
    for (auto m : state.category(*cat).menus) {
      const auto& men = state.menu(m);
      const double w = new_table * men.tables / (tables + hp.gamma1) * dish_like_[men.dish.slot];
      weights_.push_back(w);
      total += w;
    }
  }
  for (auto d : state.dishes()) {
    const double w = new_menu * state.dish(d).menus / (menus + hp.phi1) * dish_like_[d.slot];
    weights_.push_back(w);
    total += w;
  }
  {
    const double w = new_menu * hp.phi1 / (menus + hp.phi1) * new_dish_like_;
    weights_.push_back(w);
    total += w;
  }
  if (total < kTinyTotal) {
    double top = 0.0;
    for (double w : weights_) top = std::max(top, w);
    total = 0.0;
    for (double& w : weights_) total += (w /= top);
  }
  std::size_t k = sample_index(weights_, total, rng);
  if (k < n_tables) {
    const auto t = sec->tables[k];
    const auto m = state.table(t).menu;
    path.table = Choice<TableId>::of(t);
    path.menu = Choice<MenuId>::of(m);
    path.dish = Choice<DishId>::of(state.menu(m).dish);
    return path;
  }
  k -= n_tables;
  if (k < n_menus) {
    const auto m = state.category(*cat).menus[k];
    path.menu = Choice<MenuId>::of(m);
    path.dish = Choice<DishId>::of(state.menu(m).dish);
    return path;
  }
  k -= n_menus;
  if (k < state.dishes().size()) path.dish = Choice<DishId>::of(state.dishes()[k]);
  return path;
}

FullPath PathSampler::sample_prior(const SeatingState& state, std::uint32_t doc, const Hyperparams& hp, Rng& rng) {
  const auto supers = super_topic_candidates(state, doc, hp);
  weights_.clear();
  for (const auto& s : supers) weights_.push_back(s.weight);
  const auto& pick = supers[sample_index(weights_, rng)];
  const auto lowers = sub_topic_candidates(state, doc, pick.category.existing, hp);
  weights_.clear();
  for (const auto& s : lowers) weights_.push_back(s.weight);
  const auto& low = lowers[sample_index(weights_, rng)];
  return FullPath{pick.entryway, pick.category, low.table, low.menu, low.dish};
}

std::vector<JointCandidate> conditional_distribution(const SeatingState& state, std::uint32_t doc, std::uint32_t word,
                                                     const Hyperparams& hp) {
  PathSampler sampler;
  sampler.prepare(state, doc, word, hp);
  double z = 0.0;
  for (const auto& s : sampler.super_masses()) z += s.mass;
  std::vector<JointCandidate> out;
  for (const auto& s : sampler.super_masses()) {
    const auto lower = sampler.lower_candidates(state, doc, s.category.existing, hp);
    double lower_total = 0.0;
    for (const auto& c : lower) lower_total += c.weight;
    for (const auto& c : lower) {
      out.push_back({FullPath{s.entryway, s.category, c.table, c.menu, c.dish}, s.mass / z * (c.weight / lower_total)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void resample_token(SeatingState& state, TokenRef token, const Hyperparams& hp, PathSampler& sampler, Rng& rng) {
  const auto word = state.unseat(token);
  const auto path = sampler.sample(state, token.doc, word, hp, rng);
  state.seat(token, word, path);
}

void gibbs_sweep(SeatingState& state, const Hyperparams& hp, PathSampler& sampler, Rng& rng) {
  for (std::uint32_t j = 0; j < state.num_documents(); ++j) {
    const auto len = state.document_length(j);
    for (std::uint32_t i = 0; i < len; ++i) resample_token(state, TokenRef{j, i}, hp, sampler, rng);
  }
#ifndef NDEBUG
  if (const auto report = audit_counts(state); !report.clean()) {
    throw StateError("count audit failed after sweep: " + report.discrepancies.front().family + " " +
                     report.discrepancies.front().detail);
  }
#endif
}

SeatingState initialize_state(const Corpus& corpus, const Hyperparams& hp, PathSampler& sampler, Rng& rng) {
  if (corpus.num_tokens() == 0) throw EmptyCorpusError("cannot train on an empty corpus");
  SeatingState state(corpus.document_lengths(), corpus.vocab_size());
  for (std::uint32_t j = 0; j < corpus.num_documents(); ++j) {
    const auto& toks = corpus.document(j).tokens;
    for (std::uint32_t i = 0; i < toks.size(); ++i) {
      const auto path = sampler.sample(state, j, toks[i], hp, rng);
      state.seat(TokenRef{j, i}, toks[i], path);
    }
  }
  return state;
}

double resample_concentration(double current, const std::vector<std::uint64_t>& group_sizes, std::uint64_t components,
                              const GammaPrior& prior, Rng& rng, int iterations) {
  std::vector<double> sizes;
  for (auto n : group_sizes)
    if (n > 0) sizes.push_back(static_cast<double>(n));
  if (sizes.empty()) return std::max(sample_gamma(prior.shape, prior.scale, rng), std::numeric_limits<double>::min());

  double value = current;
  for (int it = 0; it < iterations; ++it) {
    double sum_log_w = 0.0;
    double sum_s = 0.0;
    for (double n : sizes) {
      sum_log_w += std::log(std::max(sample_beta(value + 1.0, n, rng), std::numeric_limits<double>::min()));
      if (sample_bernoulli(n / (n + value), rng)) sum_s += 1.0;
    }
    const double shape = prior.shape + static_cast<double>(components) - sum_s;
    const double rate = 1.0 / prior.scale - sum_log_w;
    value = std::max(sample_gamma(shape, 1.0 / rate, rng), std::numeric_limits<double>::min());
  }
  return value;
}

Hyperparams resample_hyperparams(const SeatingState& state, const Hyperparams& current, const GammaPriors& priors,
                                 Rng& rng, int iterations) {
  Hyperparams next = current;
  next.beta = priors.beta;

  // alpha0: customers -> entryways within each restaurant.
  std::vector<std::uint64_t> groups;
  for (std::uint32_t j = 0; j < state.num_documents(); ++j) groups.push_back(state.restaurant(j).customers);
  next.alpha0 = resample_concentration(current.alpha0, groups, state.total_entryways(), priors.alpha0, rng, iterations);

  // gamma0: entryways -> categories, one global group.
  next.gamma0 = resample_concentration(current.gamma0, {state.total_entryways()}, state.categories().size(),
                                       priors.gamma0, rng, iterations);

  // alpha1: customers -> tables within each (restaurant, category) section.
  groups.clear();
  for (std::uint32_t j = 0; j < state.num_documents(); ++j)
    for (const auto& sec : state.restaurant(j).sections) groups.push_back(sec.customers);
  next.alpha1 = resample_concentration(current.alpha1, groups, state.total_tables(), priors.alpha1, rng, iterations);

  // gamma1: tables -> menus within each category.
  groups.clear();
  for (auto c : state.categories()) groups.push_back(state.category(c).tables);
  next.gamma1 = resample_concentration(current.gamma1, groups, state.total_menus(), priors.gamma1, rng, iterations);

  // phi1: menus -> dishes, one global group.
  next.phi1 = resample_concentration(current.phi1, {state.total_menus()}, state.dishes().size(), priors.phi1, rng,
                                     iterations);
  return next;
}

// ---------------------------------------------------------------------------

NpamChain::NpamChain(const Corpus& corpus, const GammaPriors& priors, const TrainConfig& config)
    : corpus_(&corpus), priors_(priors), config_(config), hp_(priors.prior_means()), rng_(config.seed) {
  priors_.validate();
  config_.validate();
  if (corpus.num_tokens() == 0) throw EmptyCorpusError("cannot train on an empty corpus");
}

void NpamChain::initialize() {
  state_ = initialize_state(*corpus_, hp_, sampler_, rng_);
  sweeps_ = 0;
}

void NpamChain::sweep() {
  gibbs_sweep(state_, hp_, sampler_, rng_);
  if (config_.resample_hyperparams) hp_ = resample_hyperparams(state_, hp_, priors_, rng_);
  ++sweeps_;
}

TopicSnapshot NpamChain::snapshot() const { return make_snapshot(state_, hp_, sweeps_, config_.seed); }

std::vector<TopicSnapshot> train(const Corpus& corpus, const TrainConfig& config, const GammaPriors& priors,
                                 const SweepCallback& on_sweep) {
  NpamChain chain(corpus, priors, config);
  chain.initialize();
  std::vector<TopicSnapshot> out;
  const auto total = config.total_sweeps();
  for (std::uint64_t s = 1; s <= total; ++s) {
    chain.sweep();
    if (on_sweep) on_sweep(chain);
    if (s > config.burn_in && (s - config.burn_in) % config.sample_lag == 0) out.push_back(chain.snapshot());
  }
  return out;
}

ForwardSample forward_simulate(const std::vector<std::uint32_t>& doc_lengths, std::uint32_t vocab_size,
                               const Hyperparams& hp, Rng& rng) {
  hp.validate();
  ForwardSample out{SeatingState(doc_lengths, vocab_size), {}};
  PathSampler sampler;
  std::vector<double> word_weights(vocab_size);
  for (std::uint32_t j = 0; j < doc_lengths.size(); ++j) {
    out.words.emplace_back();
    for (std::uint32_t i = 0; i < doc_lengths[j]; ++i) {
      const auto path = sampler.sample_prior(out.state, j, hp, rng);
      for (std::uint32_t x = 0; x < vocab_size; ++x) word_weights[x] = word_likelihood(out.state, path.dish.existing, x, hp.beta);
      const auto word = static_cast<std::uint32_t>(sample_index(word_weights, rng));
      out.state.seat(TokenRef{j, i}, word, path);
      out.words.back().push_back(word);
    }
  }
  return out;
}

}  // namespace npam
