#include "npam/pam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "npam/error.hpp"

namespace npam {

void PamModel::validate() const {
  if (num_super < 1 || num_sub < 1) throw ParameterError("PAM: need at least one super-topic and one sub-topic");
  if (root_alpha.size() != num_super) throw ParameterError("PAM: root Dirichlet has wrong dimension");
  for (double a : root_alpha)
    if (!(a > 0.0)) throw ParameterError("PAM: root Dirichlet parameters must be positive");
  if (super_alpha.size() != num_super) throw ParameterError("PAM: need one Dirichlet per super-topic");
  for (const auto& row : super_alpha) {
    if (row.size() != num_sub) throw ParameterError("PAM: super-topic Dirichlet has wrong dimension");
    bool any = false;
    for (double a : row) {
      if (a < 0.0) throw ParameterError("PAM: negative Dirichlet parameter");
      any = any || a > 0.0;
    }
    if (!any) throw ParameterError("PAM: super-topic with no children");
  }
  if (!(beta > 0.0)) throw ParameterError("PAM: beta must be positive");
}

PamModel PamModel::symmetric(std::uint32_t s2, std::uint32_t s3, double root_alpha, double super_alpha, double beta) {
  PamModel m;
  m.num_super = s2;
  m.num_sub = s3;
  m.root_alpha.assign(s2, root_alpha);
  m.super_alpha.assign(s2, std::vector<double>(s3, super_alpha));
  m.beta = beta;
  m.validate();
  return m;
}

std::pair<Corpus, GroundTruth> pam_generate(const PamModel& model, const std::vector<std::vector<double>>& word_dists,
                                            std::uint32_t n_docs, std::uint32_t doc_len, Rng& rng,
                                            Vocabulary vocabulary) {
  model.validate();
  if (word_dists.size() != model.num_sub) throw InputError("pam_generate: need one word distribution per sub-topic");
  const std::size_t vocab = word_dists.front().size();
  if (vocab == 0) throw InputError("pam_generate: empty word distributions");
  for (const auto& row : word_dists) {
    if (row.size() != vocab) throw InputError("pam_generate: word distributions differ in length");
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw InputError("pam_generate: negative word probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("pam_generate: word distribution does not sum to 1");
  }
  if (vocabulary.size() == 0) vocabulary = Vocabulary::numbered(static_cast<std::uint32_t>(vocab));
  if (vocabulary.size() != vocab) throw InputError("pam_generate: vocabulary size disagrees with word distributions");

  std::vector<Document> docs;
  GroundTruth truth;
  for (std::uint32_t j = 0; j < n_docs; ++j) {
    const auto root = sample_dirichlet(model.root_alpha, rng);
    std::vector<std::vector<double>> children;
    children.reserve(model.num_super);
    for (const auto& row : model.super_alpha) children.push_back(sample_dirichlet(row, rng));

    Document doc;
    doc.label = "synthetic:" + std::to_string(j);
    std::vector<TopicPair> labels;
    for (std::uint32_t i = 0; i < doc_len; ++i) {
      const auto l = static_cast<std::uint32_t>(sample_index(root, rng));
      const auto m = static_cast<std::uint32_t>(sample_index(children[l], rng));
      doc.tokens.push_back(static_cast<WordId>(sample_index(word_dists[m], rng)));
      labels.push_back({l, m});
    }
    docs.push_back(std::move(doc));
    truth.labels.push_back(std::move(labels));
  }
  return {Corpus(std::move(docs), std::move(vocabulary)), std::move(truth)};
}

void PamConfig::validate() const {
  if (num_super < 1 || num_sub < 1) throw ParameterError("PAM: need at least one super-topic and one sub-topic");
  if (!(root_alpha > 0.0) || !(super_alpha > 0.0) || !(beta > 0.0)) throw ParameterError("PAM: Dirichlet parameters must be positive");
}

// ---------------------------------------------------------------------------

std::vector<double> PamSnapshot::super_mixture(std::uint32_t doc) const {
  const auto& row = doc_super.at(doc);
  const double n = std::accumulate(row.begin(), row.end(), 0.0);
  std::vector<double> out(config.num_super);
  for (std::uint32_t l = 0; l < config.num_super; ++l) out[l] = (row[l] + config.root_alpha) / (n + config.num_super * config.root_alpha);
  return out;
}

std::vector<double> PamSnapshot::sub_mixture(std::uint32_t doc, std::uint32_t super_topic) const {
  const auto s3 = config.num_sub;
  const double n = doc_super.at(doc).at(super_topic);
  std::vector<double> out(s3);
  for (std::uint32_t m = 0; m < s3; ++m)
    out[m] = (doc_super_sub[doc][super_topic * s3 + m] + config.super_alpha) / (n + s3 * config.super_alpha);
  return out;
}

std::vector<double> PamSnapshot::word_distribution(std::uint32_t sub_topic) const {
  const double denom = sub_totals.at(sub_topic) + vocab_size * config.beta;
  std::vector<double> out(vocab_size);
  for (std::uint32_t x = 0; x < vocab_size; ++x) out[x] = (sub_word[sub_topic][x] + config.beta) / denom;
  return out;
}

PamChain::PamChain(const Corpus& corpus, const PamConfig& config, std::uint64_t seed)
    : corpus_(&corpus), config_(config), seed_(seed), rng_(seed) {
  config_.validate();
  if (corpus.num_tokens() == 0) throw EmptyCorpusError("cannot train on an empty corpus");
  const auto s2 = config_.num_super, s3 = config_.num_sub;
  doc_super_.assign(corpus.num_documents(), std::vector<std::uint32_t>(s2, 0));
  doc_super_sub_.assign(corpus.num_documents(), std::vector<std::uint32_t>(static_cast<std::size_t>(s2) * s3, 0));
  sub_word_.assign(s3, std::vector<std::uint32_t>(corpus.vocab_size(), 0));
  sub_totals_.assign(s3, 0);
  z_.resize(corpus.num_documents());
}

void PamChain::add(std::uint32_t doc, std::uint32_t word, TopicPair z, int delta) {
  doc_super_[doc][z.super_topic] += delta;
  doc_super_sub_[doc][z.super_topic * config_.num_sub + z.sub_topic] += delta;
  sub_word_[z.sub_topic][word] += delta;
  sub_totals_[z.sub_topic] += delta;
}

void PamChain::fill_weights(std::uint32_t doc, std::uint32_t word, std::vector<double>& out) const {
  const auto s2 = config_.num_super, s3 = config_.num_sub;
  const double vb = corpus_->vocab_size() * config_.beta;
  out.resize(static_cast<std::size_t>(s2) * s3);
  // Word factor depends only on the sub-topic.
  thread_local std::vector<double> word_factor;
  word_factor.resize(s3);
  for (std::uint32_t m = 0; m < s3; ++m) word_factor[m] = (sub_word_[m][word] + config_.beta) / (sub_totals_[m] + vb);
  const auto& ds = doc_super_[doc];
  const auto& dss = doc_super_sub_[doc];
  for (std::uint32_t l = 0; l < s2; ++l) {
    const double nl = ds[l];
    const double root = (nl + config_.root_alpha) / (nl + s3 * config_.super_alpha);
    for (std::uint32_t m = 0; m < s3; ++m) {
      out[l * s3 + m] = root * (dss[l * s3 + m] + config_.super_alpha) * word_factor[m];
    }
  }
}

void PamChain::initialize() {
  const auto s3 = config_.num_sub;
  for (std::uint32_t j = 0; j < corpus_->num_documents(); ++j) {
    z_[j].clear();
    for (WordId w : corpus_->document(j).tokens) {
      fill_weights(j, w, weights_);
      const auto k = static_cast<std::uint32_t>(sample_index(weights_, rng_));
      const TopicPair z{k / s3, k % s3};
      add(j, w, z, +1);
      z_[j].push_back(z);
    }
  }
  sweeps_ = 0;
}

void PamChain::sweep() {
  const auto s3 = config_.num_sub;
  for (std::uint32_t j = 0; j < corpus_->num_documents(); ++j) {
    const auto& toks = corpus_->document(j).tokens;
    for (std::uint32_t i = 0; i < toks.size(); ++i) {
      add(j, toks[i], z_[j][i], -1);
      fill_weights(j, toks[i], weights_);
      const auto k = static_cast<std::uint32_t>(sample_index(weights_, rng_));
      z_[j][i] = TopicPair{k / s3, k % s3};
      add(j, toks[i], z_[j][i], +1);
    }
  }
  ++sweeps_;
}

std::vector<double> PamChain::token_conditional(std::uint32_t doc, std::uint32_t pos) const {
  const auto w = corpus_->document(doc).tokens.at(pos);
  auto& self = const_cast<PamChain&>(*this);
  self.add(doc, w, z_[doc][pos], -1);
  std::vector<double> out;
  fill_weights(doc, w, out);
  self.add(doc, w, z_[doc][pos], +1);
  return out;
}

PamSnapshot PamChain::snapshot() const {
  PamSnapshot s;
  s.sweep = sweeps_;
  s.seed = seed_;
  s.config = config_;
  s.vocab_size = corpus_->vocab_size();
  s.doc_super = doc_super_;
  s.doc_super_sub = doc_super_sub_;
  s.sub_word = sub_word_;
  s.sub_totals = sub_totals_;
  s.super_sub.assign(config_.num_super, std::vector<std::uint64_t>(config_.num_sub, 0));
  for (const auto& row : doc_super_sub_)
    for (std::uint32_t l = 0; l < config_.num_super; ++l)
      for (std::uint32_t m = 0; m < config_.num_sub; ++m) s.super_sub[l][m] += row[l * config_.num_sub + m];
  s.assignments = z_;
  return s;
}

std::vector<PamSnapshot> pam_train(const Corpus& corpus, const PamConfig& config, const TrainConfig& train_config) {
  train_config.validate();
  PamChain chain(corpus, config, train_config.seed);
  chain.initialize();
  std::vector<PamSnapshot> out;
  const auto total = train_config.total_sweeps();
  for (std::uint64_t s = 1; s <= total; ++s) {
    chain.sweep();
    if (s > train_config.burn_in && (s - train_config.burn_in) % train_config.sample_lag == 0) out.push_back(chain.snapshot());
  }
  return out;
}

// ---------------------------------------------------------------------------

PamGenerator::PamGenerator(PamSnapshot snapshot) : snap_(std::move(snapshot)) {
  snap_.config.validate();
  if (snap_.vocab_size == 0) throw InputError("generator: empty vocabulary");
  for (std::uint32_t m = 0; m < snap_.config.num_sub; ++m) {
    auto dist = snap_.word_distribution(m);
    std::partial_sum(dist.begin(), dist.end(), dist.begin());
    word_cdf_.push_back(std::move(dist));
  }
}

Document PamGenerator::generate(std::uint32_t length, Rng& rng) const {
  if (length < 1) throw ParameterError("pam_generate_document: length must be >= 1");
  const auto& c = snap_.config;
  const std::vector<double> root_alpha(c.num_super, c.root_alpha);
  const std::vector<double> child_alpha(c.num_sub, c.super_alpha);
  const auto root = sample_dirichlet(root_alpha, rng);
  std::vector<std::vector<double>> children(c.num_super);  // drawn on first use

  Document doc;
  doc.tokens.reserve(length);
  for (std::uint32_t i = 0; i < length; ++i) {
    const auto l = sample_index(root, rng);
    if (children[l].empty()) children[l] = sample_dirichlet(child_alpha, rng);
    const auto m = sample_index(children[l], rng);
    const auto& cdf = word_cdf_[m];
    const double u = uniform01(rng) * cdf.back();
    const auto x = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1);
    doc.tokens.push_back(static_cast<WordId>(x));
  }
  return doc;
}

Document pam_generate_document(const PamSnapshot& snapshot, std::uint32_t length, Rng& rng) {
  return PamGenerator(snapshot).generate(length, rng);
}

std::string pam_snapshot_to_json(const PamSnapshot& s) {
  using nlohmann::json;
  json j;
  j["format"] = "pam-snapshot";
  j["version"] = 1;
  j["sweep"] = s.sweep;
  j["seed"] = s.seed;
  j["config"] = {{"num_super_topics", s.config.num_super}, {"num_sub_topics", s.config.num_sub},
                 {"root_alpha", s.config.root_alpha},     {"super_alpha", s.config.super_alpha},
                 {"beta", s.config.beta}};
  j["vocab_size"] = s.vocab_size;
  j["doc_super"] = s.doc_super;
  j["doc_super_sub"] = s.doc_super_sub;
  j["sub_word"] = s.sub_word;
  j["sub_totals"] = s.sub_totals;
  j["super_sub"] = s.super_sub;
  return j.dump(1) + "\n";
}

PamSnapshot pam_snapshot_from_json(std::string_view text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "pam-snapshot") throw FormatError("snapshot: not a PAM snapshot");
    PamSnapshot s;
    s.sweep = j.at("sweep").get<std::uint64_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    s.config = PamConfig{c.at("num_super_topics").get<std::uint32_t>(), c.at("num_sub_topics").get<std::uint32_t>(),
                         c.at("root_alpha").get<double>(), c.at("super_alpha").get<double>(), c.at("beta").get<double>()};
    s.config.validate();
    s.vocab_size = j.at("vocab_size").get<std::uint32_t>();
    s.doc_super = j.at("doc_super").get<std::vector<std::vector<std::uint32_t>>>();
    s.doc_super_sub = j.at("doc_super_sub").get<std::vector<std::vector<std::uint32_t>>>();
    s.sub_word = j.at("sub_word").get<std::vector<std::vector<std::uint32_t>>>();
    s.sub_totals = j.at("sub_totals").get<std::vector<std::uint32_t>>();
    s.super_sub = j.at("super_sub").get<std::vector<std::vector<std::uint64_t>>>();
    if (s.sub_word.size() != s.config.num_sub || s.sub_totals.size() != s.config.num_sub)
      throw FormatError("snapshot: sub-topic tables have wrong size");
    for (const auto& row : s.sub_word)
      if (row.size() != s.vocab_size) throw FormatError("snapshot: word table has wrong width");
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("PAM snapshot: ") + e.what());
  }
}

}  // namespace npam
