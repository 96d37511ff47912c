#include "npam/generate.hpp"

#include <algorithm>
#include <numeric>

#include "npam/error.hpp"

namespace npam {

NpamGenerator::NpamGenerator(TopicSnapshot snapshot) : snap_(std::move(snapshot)) {
  snap_.hyper.validate();
  if (snap_.vocab_size == 0) throw InputError("generator: empty vocabulary");
  menus_of_super_.assign(snap_.num_super, {});
  for (std::uint32_t p = 0; p < snap_.menus.size(); ++p) menus_of_super_[snap_.menus[p].super_topic].push_back(p);
  for (std::uint32_t s = 0; s < snap_.num_sub; ++s) {
    auto dist = snap_.word_distribution(s);
    std::partial_sum(dist.begin(), dist.end(), dist.begin());
    word_cdf_.push_back(std::move(dist));
  }
}

namespace {

struct LocalTable {
  std::uint32_t menu;
  double customers;
};

}  // namespace

Document NpamGenerator::generate(std::uint32_t length, Rng& rng) const {
  if (length < 1) throw ParameterError("generate_document: length must be >= 1");
  const auto& hp = snap_.hyper;

  // Overlay copies of the shared registries; they grow as this document opens
  // structures and are discarded afterwards.
  std::vector<double> ent_total(snap_.super_entryways.begin(), snap_.super_entryways.end());
  std::vector<double> cat_tables(snap_.super_tables.begin(), snap_.super_tables.end());
  std::vector<TopicSnapshot::Menu> menus = snap_.menus;
  std::vector<std::vector<std::uint32_t>> menus_of = menus_of_super_;
  std::vector<double> sub_menus(snap_.sub_menus.begin(), snap_.sub_menus.end());
  double e_total = static_cast<double>(snap_.total_entryways());
  double m_total = static_cast<double>(snap_.total_menus());

  std::vector<std::pair<std::uint32_t, double>> entryways;  // (category, customers)
  std::vector<std::vector<LocalTable>> tables(ent_total.size());
  std::vector<double> section_customers(ent_total.size(), 0.0);
  double customers = 0.0;

  std::vector<double> w;
  Document doc;
  doc.tokens.reserve(length);
  for (std::uint32_t i = 0; i < length; ++i) {
    // Entryway, then category for a new entryway.
    w.clear();
    for (const auto& e : entryways) w.push_back(e.second);
    w.push_back(hp.alpha0);
    std::size_t k = sample_index(w, customers + hp.alpha0, rng);
    if (k == entryways.size()) {
      w.assign(ent_total.begin(), ent_total.end());
      w.push_back(hp.gamma0);
      std::size_t l = sample_index(w, e_total + hp.gamma0, rng);
      if (l == ent_total.size()) {
        ent_total.push_back(0.0);
        cat_tables.push_back(0.0);
        menus_of.emplace_back();
        tables.emplace_back();
        section_customers.push_back(0.0);
      }
      ent_total[l] += 1.0;
      e_total += 1.0;
      entryways.push_back({static_cast<std::uint32_t>(l), 0.0});
    }
    entryways[k].second += 1.0;
    customers += 1.0;
    const std::uint32_t cat = entryways[k].first;

    // Table, then menu for a new table, then dish for a new menu.
    auto& sec = tables[cat];
    w.clear();
    for (const auto& t : sec) w.push_back(t.customers);
    w.push_back(hp.alpha1);
    std::size_t t = sample_index(w, section_customers[cat] + hp.alpha1, rng);
    if (t == sec.size()) {
      w.clear();
      for (auto p : menus_of[cat]) w.push_back(menus[p].tables);
      w.push_back(hp.gamma1);
      std::size_t pick = sample_index(w, cat_tables[cat] + hp.gamma1, rng);
      std::uint32_t menu;
      if (pick == menus_of[cat].size()) {
        w.assign(sub_menus.begin(), sub_menus.end());
        w.push_back(hp.phi1);
        std::size_t d = sample_index(w, m_total + hp.phi1, rng);
        if (d == sub_menus.size()) sub_menus.push_back(0.0);
        sub_menus[d] += 1.0;
        m_total += 1.0;
        menu = static_cast<std::uint32_t>(menus.size());
        menus.push_back({cat, static_cast<std::uint32_t>(d), 0});
        menus_of[cat].push_back(menu);
      } else {
        menu = menus_of[cat][pick];
      }
      ++menus[menu].tables;
      cat_tables[cat] += 1.0;
      sec.push_back({menu, 0.0});
    }
    sec[t].customers += 1.0;
    section_customers[cat] += 1.0;

    const std::uint32_t sub = menus[sec[t].menu].sub_topic;
    WordId word;
    if (sub < snap_.num_sub) {
      const auto& cdf = word_cdf_[sub];
      const double u = uniform01(rng) * cdf.back();
      word = static_cast<WordId>(std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                                       cdf.size() - 1));
    } else {
      word = static_cast<WordId>(std::min<double>(uniform01(rng) * snap_.vocab_size, snap_.vocab_size - 1));
    }
    doc.tokens.push_back(word);
  }
  return doc;
}

Document generate_document(const TopicSnapshot& snapshot, std::uint32_t length, Rng& rng) {
  return NpamGenerator(snapshot).generate(length, rng);
}

Document generate_document(const SeatingState& state, const Hyperparams& hp, std::uint32_t length, Rng& rng) {
  return NpamGenerator(make_snapshot(state, hp, 0, 0)).generate(length, rng);
}

EnsembleGenerator::EnsembleGenerator(std::vector<std::shared_ptr<const DocumentGenerator>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw InputError("ensemble generator needs at least one member");
  for (const auto& m : members_)
    if (m->vocab_size() != members_.front()->vocab_size()) throw InputError("ensemble members disagree on vocabulary size");
}

Document EnsembleGenerator::generate(std::uint32_t length, Rng& rng) const {
  const auto& m = members_[next_ % members_.size()];
  ++next_;
  return m->generate(length, rng);
}

}  // namespace npam
