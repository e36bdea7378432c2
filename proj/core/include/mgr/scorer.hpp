#pragma once

#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "mgr/types.hpp"

namespace mgr {

/// Scoring contract consulted once per decoding step: raw, nonnegative,
/// finite scores for the constrained candidate set, same length and order as
/// `candidates`. Scores are renormalized downstream, so any positive scaling
/// of a response is equivalent. Implementations must be pure with respect to
/// their trained state.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::vector<double> score(std::string_view query, std::span<const AtomId> prefix,
                                    std::span<const AtomId> candidates) = 0;
};

/// Scores every candidate 1.0.
class UniformScorer final : public Scorer {
 public:
  std::vector<double> score(std::string_view query, std::span<const AtomId> prefix,
                            std::span<const AtomId> candidates) override;
};

/// Lookup scorer keyed by (prefix, atom). Unlisted entries fall back to a
/// default. Useful for crafting exact step distributions.
class TableScorer final : public Scorer {
 public:
  explicit TableScorer(double default_score = 1.0) : default_score_(default_score) {}

  void set(AtomSequence prefix, AtomId atom, double score);

  std::vector<double> score(std::string_view query, std::span<const AtomId> prefix,
                            std::span<const AtomId> candidates) override;

 private:
  std::map<std::pair<AtomSequence, AtomId>, double> table_;
  double default_score_;
};

}  // namespace mgr
