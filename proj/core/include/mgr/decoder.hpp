#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgr/scorer.hpp"
#include "mgr/trie.hpp"
#include "mgr/types.hpp"

namespace mgr {

/// One decoding step's distribution over the constrained candidate set.
/// Probabilities are the scorer's raw scores renormalized over the candidates
/// only; an all-zero response degrades to uniform. Log-probabilities carry
/// the sequence accumulation.
struct StepDistribution {
  std::vector<AtomId> candidates;
  std::vector<double> probabilities;  // sums to 1 within fp error
  std::vector<double> log_probs;      // log of the same values

  /// Index of the highest-probability candidate, ties to the lowest atom id.
  std::size_t argmax() const;
};

StepDistribution step_distribution(Scorer& scorer, std::string_view query,
                                   std::span<const AtomId> prefix,
                                   std::span<const AtomId> candidates);

struct RankedDocId {
  AtomSequence atoms;
  double log_prob = 0.0;
  std::vector<std::string> doc_keys;  // ascending
};

struct DecodeResult {
  std::vector<RankedDocId> ranked;  // log_prob non-increasing
  int width = 1;
  std::size_t steps = 0;
  std::size_t scorer_calls = 0;
  std::size_t max_candidate_set = 0;
};

/// Greedy constrained decoding: depth() steps of candidate lookup, scoring,
/// and argmax. The emitted sequence is always a DocID of the index.
DecodeResult decode_greedy(const PrefixTrie& trie, Scorer& scorer, std::string_view query);

/// Beam search over the trie. Every hypothesis expands over its own candidate
/// set with constrained renormalization; the top `width` by cumulative
/// log-probability survive, ties broken by ascending lexicographic sequence.
/// width == 1 reproduces decode_greedy exactly.
DecodeResult decode_beam(const PrefixTrie& trie, Scorer& scorer, std::string_view query,
                         int width);

}  // namespace mgr
