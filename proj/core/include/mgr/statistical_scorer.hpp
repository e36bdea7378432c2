#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mgr/atomizer.hpp"
#include "mgr/scorer.hpp"
#include "mgr/types.hpp"

namespace mgr {

/// Position-wise naive-Bayes scorer over (query term, atom) co-occurrences.
///
/// For step t (= prefix length) and candidate atom a:
///
///   score(a | prefix, q) = prior_t(a) * prod_terms (count(term,a,t) + alpha)
///                                                / (count(a,t) + alpha * V)
///
/// where count(a,t) is the number of training pairs whose target holds a at
/// position t, V is the number of distinct terms seen in training, and
/// prior_t is the frequency of a at position t across the whole index (the
/// global atom-frequency guidance at step one, and every later step).
/// Terms are lowercased whitespace tokens plus their codepoint trigrams.
/// Computation runs in log space; returned scores are shifted so the best
/// candidate scores 1.
class StatisticalScorer final : public Scorer {
 public:
  static StatisticalScorer train(std::span<const TrainingPair> pairs,
                                 const std::map<std::string, AtomDocId>& docids,
                                 const AtomVocabulary& vocab, double alpha);

  std::vector<double> score(std::string_view query, std::span<const AtomId> prefix,
                            std::span<const AtomId> candidates) override;

  void save(const std::filesystem::path& path) const;
  static StatisticalScorer load(const std::filesystem::path& path);

  double alpha() const { return alpha_; }
  std::size_t positions() const { return per_position_.size(); }
  std::uint64_t distinct_terms() const { return distinct_terms_; }

 private:
  struct PositionCounts {
    std::map<AtomId, std::uint64_t> prior;             // index frequency of atom at t
    std::map<AtomId, std::uint64_t> pair_count;        // training pairs with atom at t
    std::map<std::string, std::map<AtomId, std::uint64_t>> term_atom;  // co-occurrences
  };

  double alpha_ = 1.0;
  std::uint64_t document_count_ = 0;
  std::uint64_t distinct_terms_ = 0;
  std::vector<PositionCounts> per_position_;
};

}  // namespace mgr
