#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "npam/corpus.hpp"
#include "npam/random.hpp"
#include "npam/snapshot.hpp"

namespace npam {

// Anything that can sample fresh documents from its own generative process.
class DocumentGenerator {
 public:
  virtual ~DocumentGenerator() = default;
  virtual Document generate(std::uint32_t length, Rng& rng) const = 0;
  virtual std::uint32_t vocab_size() const = 0;
  virtual double beta() const = 0;
};

// Simulates a brand-new restaurant against the trained registries. The new
// document's entryways, tables, and any categories, menus or dishes it opens
// live in a per-call overlay; the trained counts are read-only, so documents
// are i.i.d. given the snapshot. Words come from the chosen sub-topic's
// smoothed distribution, or uniformly for a sub-topic opened by the overlay.
class NpamGenerator final : public DocumentGenerator {
 public:
  explicit NpamGenerator(TopicSnapshot snapshot);

  Document generate(std::uint32_t length, Rng& rng) const override;
  std::uint32_t vocab_size() const override { return snap_.vocab_size; }
  double beta() const override { return snap_.hyper.beta; }
  const TopicSnapshot& snapshot() const { return snap_; }

 private:
  TopicSnapshot snap_;
  std::vector<std::vector<std::uint32_t>> menus_of_super_;  // indices into snap_.menus
  std::vector<std::vector<double>> word_cdf_;               // per sub-topic cumulative distribution
};

Document generate_document(const TopicSnapshot& snapshot, std::uint32_t length, Rng& rng);
Document generate_document(const SeatingState& state, const Hyperparams& hp, std::uint32_t length, Rng& rng);

// Draws pseudo-documents round-robin from several generators (one per
// collected sample), so the evaluation averages over samples.
class EnsembleGenerator final : public DocumentGenerator {
 public:
  explicit EnsembleGenerator(std::vector<std::shared_ptr<const DocumentGenerator>> members);

  Document generate(std::uint32_t length, Rng& rng) const override;
  std::uint32_t vocab_size() const override { return members_.front()->vocab_size(); }
  double beta() const override { return members_.front()->beta(); }

 private:
  std::vector<std::shared_ptr<const DocumentGenerator>> members_;
  mutable std::size_t next_ = 0;
};

}  // namespace npam
