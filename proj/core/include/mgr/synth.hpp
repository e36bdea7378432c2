#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mgr/types.hpp"

namespace mgr {

/// Parameters of the deterministic synthetic corpus. Each of the
/// concepts * m (concept, slot) groups is one semantic unit with one keyword
/// surface form per language; all surface forms of a group embed within
/// `intra_min_cosine` of each other, and across groups within
/// `inter_max_cosine`.
struct SynthSpec {
  int concepts = 3;
  int languages = 4;
  int docs_per_cell = 5;  // documents per (concept, language) cell
  int m = 3;
  int dim = 16;
  double intra_min_cosine = 0.95;
  double inter_max_cosine = 0.30;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<Document> documents;
  std::vector<KeywordRecord> keywords;
  EmbeddingMap embeddings;
  std::vector<QueryRecord> queries;       // cross-lingual relevance
  std::vector<TrainingPair> training_pairs;  // same-language, cover every doc
};

/// Deterministic generation: identical spec (including seed) yields identical
/// artifacts. Embeddings are unit vectors built from per-group base axes with
/// bounded language rotations, then randomly rotated; the cosine bounds are
/// verified after construction and violations are a hard error (after a
/// bounded number of re-seeded attempts).
SynthCorpus generate_synthetic_corpus(const SynthSpec& spec);

/// Writes corpus.jsonl, keywords.jsonl, embeddings.jsonl, queries.jsonl,
/// pairs.jsonl and synth_spec.json into `dir` (created if missing).
void write_synthetic_corpus(const SynthCorpus& corpus, const SynthSpec& spec,
                            const std::filesystem::path& dir);

}  // namespace mgr
