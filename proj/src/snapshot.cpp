#include "npam/snapshot.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "npam/error.hpp"

namespace npam {

std::uint64_t TopicSnapshot::total_entryways() const {
  std::uint64_t n = 0;
  for (auto e : super_entryways) n += e;
  return n;
}

std::uint64_t TopicSnapshot::total_menus() const { return menus.size(); }

std::vector<double> TopicSnapshot::super_mixture(std::uint32_t doc) const {
  const auto& d = docs.at(doc);
  const double n = d.customers;
  const double e_total = static_cast<double>(total_entryways());
  const double new_entry = hyper.alpha0 / (n + hyper.alpha0);
  std::vector<double> out(num_super + 1, 0.0);
  for (std::uint32_t l = 0; l < num_super; ++l) out[l] = new_entry * super_entryways[l] / (e_total + hyper.gamma0);
  for (const auto& s : d.sections) out[s.super_topic] += s.customers / (n + hyper.alpha0);
  out[num_super] = new_entry * hyper.gamma0 / (e_total + hyper.gamma0);
  return out;
}

std::vector<double> TopicSnapshot::sub_mixture(std::uint32_t doc, std::uint32_t super_topic) const {
  if (super_topic >= num_super) throw InputError("sub_mixture: no such super-topic");
  const auto& d = docs.at(doc);
  const Section* sec = nullptr;
  for (const auto& s : d.sections)
    if (s.super_topic == super_topic) sec = &s;
  const double n = sec ? sec->customers : 0.0;
  const double tables = super_tables[super_topic];
  const double m_total = static_cast<double>(total_menus());
  const double new_table = hyper.alpha1 / (n + hyper.alpha1);
  const double new_menu = new_table * hyper.gamma1 / (tables + hyper.gamma1);

  std::vector<double> out(num_sub + 1, 0.0);
  if (sec)
    for (const auto& c : sec->sub_customers) out[c.id] += c.count / (n + hyper.alpha1);
  for (const auto& m : menus)
    if (m.super_topic == super_topic) out[m.sub_topic] += new_table * m.tables / (tables + hyper.gamma1);
  for (std::uint32_t s = 0; s < num_sub; ++s) out[s] += new_menu * sub_menus[s] / (m_total + hyper.phi1);
  out[num_sub] = new_menu * hyper.phi1 / (m_total + hyper.phi1);
  return out;
}

std::vector<double> TopicSnapshot::word_distribution(std::uint32_t sub_topic) const {
  const double denom = sub_totals.at(sub_topic) + vocab_size * hyper.beta;
  std::vector<double> out(vocab_size, hyper.beta / denom);
  for (const auto& c : sub_word_counts[sub_topic]) out[c.id] = (c.count + hyper.beta) / denom;
  return out;
}

std::vector<std::vector<std::uint32_t>> TopicSnapshot::connectivity() const {
  std::vector<std::vector<std::uint32_t>> out(num_super, std::vector<std::uint32_t>(num_sub, 0));
  for (const auto& m : menus) ++out[m.super_topic][m.sub_topic];
  return out;
}

std::vector<std::vector<std::uint64_t>> TopicSnapshot::edge_tables() const {
  std::vector<std::vector<std::uint64_t>> out(num_super, std::vector<std::uint64_t>(num_sub, 0));
  for (const auto& m : menus) out[m.super_topic][m.sub_topic] += m.tables;
  return out;
}

TopicSnapshot make_snapshot(const SeatingState& state, const Hyperparams& hp, std::uint64_t sweep, std::uint64_t seed) {
  TopicSnapshot snap;
  snap.sweep = sweep;
  snap.seed = seed;
  snap.hyper = hp;
  snap.vocab_size = state.vocab_size();
  snap.num_super = static_cast<std::uint32_t>(state.categories().size());
  snap.num_sub = static_cast<std::uint32_t>(state.dishes().size());

  std::vector<std::uint32_t> super_of(state.category_capacity(), 0), sub_of(state.dish_capacity(), 0);
  for (std::uint32_t i = 0; i < snap.num_super; ++i) super_of[state.categories()[i].slot] = i;
  for (std::uint32_t i = 0; i < snap.num_sub; ++i) sub_of[state.dishes()[i].slot] = i;

  for (auto c : state.categories()) {
    const auto& cat = state.category(c);
    snap.super_entryways.push_back(cat.entryways);
    snap.super_tables.push_back(cat.tables);
    for (auto m : cat.menus) {
      const auto& men = state.menu(m);
      snap.menus.push_back({super_of[c.slot], sub_of[men.dish.slot], men.tables});
    }
  }
  for (auto d : state.dishes()) {
    const auto& dish = state.dish(d);
    snap.sub_menus.push_back(dish.menus);
    snap.sub_totals.push_back(dish.customers);
    std::vector<SparseCount> row;
    for (std::uint32_t x = 0; x < dish.word_counts.size(); ++x)
      if (dish.word_counts[x] > 0) row.push_back({x, dish.word_counts[x]});
    snap.sub_word_counts.push_back(std::move(row));
  }

  snap.docs.resize(state.num_documents());
  snap.assignments.resize(state.num_documents());
  for (std::uint32_t j = 0; j < state.num_documents(); ++j) {
    const auto& rest = state.restaurant(j);
    auto& doc = snap.docs[j];
    doc.customers = rest.customers;
    for (const auto& sec : rest.sections) {
      TopicSnapshot::Section out{super_of[sec.category.slot], sec.customers, {}};
      std::map<std::uint32_t, std::uint32_t> by_sub;
      for (auto t : sec.tables) {
        const auto& tab = state.table(t);
        by_sub[sub_of[state.menu(tab.menu).dish.slot]] += tab.customers;
      }
      for (const auto& [s, n] : by_sub) out.sub_customers.push_back({s, n});
      doc.sections.push_back(std::move(out));
    }
    std::sort(doc.sections.begin(), doc.sections.end(),
              [](const auto& a, const auto& b) { return a.super_topic < b.super_topic; });
    for (std::uint32_t i = 0; i < state.document_length(j); ++i) {
      const TokenRef t{j, i};
      if (!state.is_seated(t)) throw StateError("make_snapshot: unseated token");
      const auto& s = state.seat_of(t);
      snap.assignments[j].push_back({super_of[s.category.slot], sub_of[s.dish.slot]});
    }
  }
  return snap;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json sparse_to_json(const std::vector<SparseCount>& row) {
  json out = json::array();
  for (const auto& c : row) out.push_back({c.id, c.count});
  return out;
}

std::vector<SparseCount> sparse_from_json(const json& j) {
  std::vector<SparseCount> out;
  for (const auto& e : j) out.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
  return out;
}

}  // namespace

std::string snapshot_to_json(const TopicSnapshot& s) {
  json j;
  j["format"] = "npam-snapshot";
  j["version"] = 1;
  j["sweep"] = s.sweep;
  j["seed"] = s.seed;
  j["hyperparameters"] = {{"alpha0", s.hyper.alpha0}, {"gamma0", s.hyper.gamma0}, {"alpha1", s.hyper.alpha1},
                          {"gamma1", s.hyper.gamma1}, {"phi1", s.hyper.phi1},     {"beta", s.hyper.beta}};
  j["vocab_size"] = s.vocab_size;
  j["num_super_topics"] = s.num_super;
  j["num_sub_topics"] = s.num_sub;
  j["super_entryways"] = s.super_entryways;
  j["super_tables"] = s.super_tables;
  json menus = json::array();
  for (const auto& m : s.menus) menus.push_back({{"super", m.super_topic}, {"sub", m.sub_topic}, {"tables", m.tables}});
  j["menus"] = std::move(menus);
  j["sub_menus"] = s.sub_menus;
  j["sub_totals"] = s.sub_totals;
  json words = json::array();
  for (const auto& row : s.sub_word_counts) words.push_back(sparse_to_json(row));
  j["sub_word_counts"] = std::move(words);

  // Connectivity is derivable from "menus"; written out for readers that
  // only want the structure.
  json edges = json::array();
  const auto conn = s.connectivity();
  for (std::uint32_t l = 0; l < s.num_super; ++l)
    for (std::uint32_t m = 0; m < s.num_sub; ++m)
      if (conn[l][m] > 0) edges.push_back({l, m, conn[l][m]});
  j["connectivity"] = std::move(edges);

  json docs = json::array();
  for (const auto& d : s.docs) {
    json secs = json::array();
    for (const auto& sec : d.sections)
      secs.push_back({{"super", sec.super_topic}, {"customers", sec.customers}, {"sub_customers", sparse_to_json(sec.sub_customers)}});
    docs.push_back({{"customers", d.customers}, {"sections", std::move(secs)}});
  }
  j["documents"] = std::move(docs);
  return j.dump(1) + "\n";
}

TopicSnapshot snapshot_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "npam-snapshot") throw FormatError("snapshot: not an npam snapshot");
    TopicSnapshot s;
    s.sweep = j.at("sweep").get<std::uint64_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& h = j.at("hyperparameters");
    s.hyper = Hyperparams{h.at("alpha0").get<double>(), h.at("gamma0").get<double>(), h.at("alpha1").get<double>(),
                          h.at("gamma1").get<double>(), h.at("phi1").get<double>(),   h.at("beta").get<double>()};
    s.vocab_size = j.at("vocab_size").get<std::uint32_t>();
    s.num_super = j.at("num_super_topics").get<std::uint32_t>();
    s.num_sub = j.at("num_sub_topics").get<std::uint32_t>();
    s.super_entryways = j.at("super_entryways").get<std::vector<std::uint32_t>>();
    s.super_tables = j.at("super_tables").get<std::vector<std::uint32_t>>();
    for (const auto& m : j.at("menus"))
      s.menus.push_back({m.at("super").get<std::uint32_t>(), m.at("sub").get<std::uint32_t>(), m.at("tables").get<std::uint32_t>()});
    s.sub_menus = j.at("sub_menus").get<std::vector<std::uint32_t>>();
    s.sub_totals = j.at("sub_totals").get<std::vector<std::uint32_t>>();
    for (const auto& row : j.at("sub_word_counts")) s.sub_word_counts.push_back(sparse_from_json(row));
    for (const auto& d : j.at("documents")) {
      TopicSnapshot::Doc doc;
      doc.customers = d.at("customers").get<std::uint32_t>();
      for (const auto& sec : d.at("sections"))
        doc.sections.push_back({sec.at("super").get<std::uint32_t>(), sec.at("customers").get<std::uint32_t>(),
                                sparse_from_json(sec.at("sub_customers"))});
      s.docs.push_back(std::move(doc));
    }
    s.hyper.validate();
    if (s.super_entryways.size() != s.num_super || s.super_tables.size() != s.num_super || s.sub_menus.size() != s.num_sub ||
        s.sub_totals.size() != s.num_sub || s.sub_word_counts.size() != s.num_sub) {
      throw FormatError("snapshot: table sizes disagree with topic counts");
    }
    for (const auto& m : s.menus)
      if (m.super_topic >= s.num_super || m.sub_topic >= s.num_sub) throw FormatError("snapshot: menu references unknown topic");
    for (const auto& row : s.sub_word_counts)
      for (const auto& c : row)
        if (c.id >= s.vocab_size) throw FormatError("snapshot: word id outside vocabulary");
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
}

void write_assignments(std::ostream& out, const TokenAssignments& assignments) {
  for (std::size_t j = 0; j < assignments.size(); ++j)
    for (std::size_t i = 0; i < assignments[j].size(); ++i)
      out << j << ' ' << i << ' ' << assignments[j][i].super_topic << ' ' << assignments[j][i].sub_topic << '\n';
}

TokenAssignments read_assignments(std::istream& in) {
  if (!in) throw InputError("read_assignments: stream is not readable");
  TokenAssignments out;
  std::size_t j = 0, i = 0;
  TopicPair p{};
  while (in >> j >> i >> p.super_topic >> p.sub_topic) {
    if (j >= out.size()) {
      if (j != out.size()) throw FormatError("assignments: documents out of order");
      out.emplace_back();
    }
    if (i != out[j].size()) throw FormatError("assignments: tokens out of order");
    out[j].push_back(p);
  }
  if (!in.eof()) throw FormatError("assignments: malformed line");
  return out;
}

}  // namespace npam
