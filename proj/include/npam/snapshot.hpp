#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "npam/corpus.hpp"
#include "npam/npam_sampler.hpp"
#include "npam/seating.hpp"

namespace npam {

using TokenAssignments = std::vector<std::vector<TopicPair>>;  // [doc][token]

struct SparseCount {
  std::uint32_t id = 0;
  std::uint32_t count = 0;
  friend bool operator==(const SparseCount&, const SparseCount&) = default;
};

// Frozen export of a chain state with dense super-topic (category) and
// sub-topic (dish) ids, ordered by creation. Mixtures are the predictive
// distributions of the restaurant process at snapshot time; the trailing
// entry of each mixture is the mass reserved for an unseen topic.
class TopicSnapshot {
 public:
  struct Menu {
    std::uint32_t super_topic = 0;
    std::uint32_t sub_topic = 0;
    std::uint32_t tables = 0;
    friend bool operator==(const Menu&, const Menu&) = default;
  };
  struct Section {
    std::uint32_t super_topic = 0;
    std::uint32_t customers = 0;
    std::vector<SparseCount> sub_customers;  // customers at tables serving each sub-topic
    friend bool operator==(const Section&, const Section&) = default;
  };
  struct Doc {
    std::uint32_t customers = 0;
    std::vector<Section> sections;
    friend bool operator==(const Doc&, const Doc&) = default;
  };

  std::uint64_t sweep = 0;
  std::uint64_t seed = 0;
  Hyperparams hyper;
  std::uint32_t vocab_size = 0;
  std::uint32_t num_super = 0;
  std::uint32_t num_sub = 0;

  std::vector<std::uint32_t> super_entryways;  // entryways per super-topic, all restaurants
  std::vector<std::uint32_t> super_tables;     // tables per super-topic, all restaurants
  std::vector<Menu> menus;                     // grouped by super-topic, creation order within
  std::vector<std::uint32_t> sub_menus;        // menus serving each sub-topic
  std::vector<std::uint32_t> sub_totals;       // customers eating each sub-topic
  std::vector<std::vector<SparseCount>> sub_word_counts;  // nonzero C(m,x)
  std::vector<Doc> docs;
  TokenAssignments assignments;

  std::uint64_t total_entryways() const;
  std::uint64_t total_menus() const;

  // Length num_super + 1.
  std::vector<double> super_mixture(std::uint32_t doc) const;
  // Length num_sub + 1.
  std::vector<double> sub_mixture(std::uint32_t doc, std::uint32_t super_topic) const;
  // Length vocab_size: (C(m,x) + beta) / (C(m) + V beta).
  std::vector<double> word_distribution(std::uint32_t sub_topic) const;
  // [super][sub] number of menus of the super-topic serving the sub-topic;
  // an edge exists iff the entry is positive.
  std::vector<std::vector<std::uint32_t>> connectivity() const;
  // [super][sub] tables seated under menus of the super-topic serving the sub-topic.
  std::vector<std::vector<std::uint64_t>> edge_tables() const;

  friend bool operator==(const TopicSnapshot&, const TopicSnapshot&) = default;
};

TopicSnapshot make_snapshot(const SeatingState& state, const Hyperparams& hp, std::uint64_t sweep, std::uint64_t seed);

// Self-describing JSON document (without the token assignments).
std::string snapshot_to_json(const TopicSnapshot& snapshot);
TopicSnapshot snapshot_from_json(std::string_view text);

// Text table, one "doc token super sub" line per token.
void write_assignments(std::ostream& out, const TokenAssignments& assignments);
TokenAssignments read_assignments(std::istream& in);

}  // namespace npam
