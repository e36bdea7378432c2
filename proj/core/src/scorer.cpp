#include "mgr/scorer.hpp"

namespace mgr {

std::vector<double> UniformScorer::score(std::string_view, std::span<const AtomId>,
                                         std::span<const AtomId> candidates) {
  return std::vector<double>(candidates.size(), 1.0);
}

void TableScorer::set(AtomSequence prefix, AtomId atom, double score) {
  table_[{std::move(prefix), atom}] = score;
}

std::vector<double> TableScorer::score(std::string_view, std::span<const AtomId> prefix,
                                       std::span<const AtomId> candidates) {
  const AtomSequence key(prefix.begin(), prefix.end());
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const AtomId atom : candidates) {
    const auto it = table_.find({key, atom});
    scores.push_back(it == table_.end() ? default_score_ : it->second);
  }
  return scores;
}

}  // namespace mgr
