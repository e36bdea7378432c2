#include "mgr/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "mgr/error.hpp"

namespace mgr {

std::size_t StepDistribution::argmax() const {
  // Compared in log space so ties resolve exactly as in beam ranking.
  // Strict > keeps the first (lowest-atom-id) winner on ties, since
  // candidates are ascending.
  std::size_t best = 0;
  for (std::size_t i = 1; i < log_probs.size(); ++i) {
    if (log_probs[i] > log_probs[best]) best = i;
  }
  return best;
}

StepDistribution step_distribution(Scorer& scorer, std::string_view query,
                                   std::span<const AtomId> prefix,
                                   std::span<const AtomId> candidates) {
  if (candidates.empty()) {
    throw Error("step distribution requires a non-empty candidate set");
  }
  std::vector<double> raw = scorer.score(query, prefix, candidates);
  if (raw.size() != candidates.size()) {
    throw Error("scorer returned " + std::to_string(raw.size()) + " scores for " +
                std::to_string(candidates.size()) + " candidates");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw Error("scorer returned a non-finite score at index " + std::to_string(i));
    }
    if (raw[i] < 0.0) {
      throw Error("scorer returned a negative score at index " + std::to_string(i));
    }
    sum += raw[i];
  }

  StepDistribution dist;
  dist.candidates.assign(candidates.begin(), candidates.end());
  dist.probabilities.resize(raw.size());
  dist.log_probs.resize(raw.size());
  if (sum == 0.0) {
    // All-zero response: uniform over the candidate set.
    const double p = 1.0 / static_cast<double>(raw.size());
    const double logp = std::log(p);
    std::fill(dist.probabilities.begin(), dist.probabilities.end(), p);
    std::fill(dist.log_probs.begin(), dist.log_probs.end(), logp);
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      dist.probabilities[i] = raw[i] / sum;
      dist.log_probs[i] = std::log(dist.probabilities[i]);  // -inf for zero scores
    }
  }
  return dist;
}

DecodeResult decode_greedy(const PrefixTrie& trie, Scorer& scorer, std::string_view query) {
  DecodeResult result;
  result.width = 1;
  result.steps = trie.depth();

  AtomSequence sequence;
  sequence.reserve(trie.depth());
  double log_prob = 0.0;
  for (std::size_t t = 0; t < trie.depth(); ++t) {
    const std::vector<AtomId> candidates = trie.candidate_atoms(sequence);
    const StepDistribution dist = step_distribution(scorer, query, sequence, candidates);
    ++result.scorer_calls;
    result.max_candidate_set = std::max(result.max_candidate_set, candidates.size());
    const std::size_t pick = dist.argmax();
    sequence.push_back(dist.candidates[pick]);
    log_prob += dist.log_probs[pick];
  }

  RankedDocId entry;
  entry.atoms = sequence;
  entry.log_prob = log_prob;
  entry.doc_keys = trie.docs_with_prefix(sequence);
  result.ranked.push_back(std::move(entry));
  return result;
}

namespace {

struct Hypothesis {
  AtomSequence atoms;
  double log_prob = 0.0;
};

// Cumulative log-probability descending, then lexicographic sequence
// ascending. Sequences are unique per step, so this is a total order.
bool hypothesis_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.atoms < b.atoms;
}

}  // namespace

DecodeResult decode_beam(const PrefixTrie& trie, Scorer& scorer, std::string_view query,
                         int width) {
  if (width < 1) {
    throw Error("beam width must be >= 1");
  }
  DecodeResult result;
  result.width = width;
  result.steps = trie.depth();

  std::vector<Hypothesis> beam{Hypothesis{}};
  for (std::size_t t = 0; t < trie.depth(); ++t) {
    std::vector<Hypothesis> expanded;
    for (const Hypothesis& hyp : beam) {
      const std::vector<AtomId> candidates = trie.candidate_atoms(hyp.atoms);
      const StepDistribution dist = step_distribution(scorer, query, hyp.atoms, candidates);
      ++result.scorer_calls;
      result.max_candidate_set = std::max(result.max_candidate_set, candidates.size());
      for (std::size_t i = 0; i < dist.candidates.size(); ++i) {
        Hypothesis next;
        next.atoms = hyp.atoms;
        next.atoms.push_back(dist.candidates[i]);
        next.log_prob = hyp.log_prob + dist.log_probs[i];
        expanded.push_back(std::move(next));
      }
    }
    std::sort(expanded.begin(), expanded.end(), hypothesis_before);
    if (expanded.size() > static_cast<std::size_t>(width)) {
      expanded.resize(static_cast<std::size_t>(width));
    }
    beam = std::move(expanded);
  }

  result.ranked.reserve(beam.size());
  for (Hypothesis& hyp : beam) {
    RankedDocId entry;
    entry.doc_keys = trie.docs_with_prefix(hyp.atoms);
    entry.atoms = std::move(hyp.atoms);
    entry.log_prob = hyp.log_prob;
    result.ranked.push_back(std::move(entry));
  }
  return result;
}

}  // namespace mgr
