#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgr/types.hpp"

namespace mgr {

/// The union of all document keyword lists, ordered by descending frequency
/// with ties broken by ascending codepoint order. Frequency counts
/// multiplicity across records, including repeats inside one record.
struct GlobalKeywordSet {
  std::vector<std::string> keywords;
  std::unordered_map<std::string, std::size_t> frequency;

  std::size_t size() const { return keywords.size(); }
};

GlobalKeywordSet build_global_keyword_set(std::span<const KeywordRecord> records);

/// Cosine similarity clamped to [-1, 1]. Throws on zero vectors or a
/// dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

struct Atom {
  AtomId id = 0;
  std::string center_keyword;
  std::vector<std::string> members;  // join order; first member is the center
};

/// Result of the leader-clustering pass: atoms partition the global keyword
/// set, atom ids are contiguous in founding order.
struct AtomVocabulary {
  std::vector<Atom> atoms;  // atoms[i].id == i
  double theta = 0.0;
  std::unordered_map<std::string, AtomId> keyword_to_atom;

  std::size_t atom_count() const { return atoms.size(); }
};

/// Single-pass leader clustering over the keywords in GlobalKeywordSet order:
/// a keyword joins the existing center of maximum cosine if that maximum is
/// >= theta (ties to the lowest atom id), otherwise it founds a new atom.
/// theta above 1 turns every keyword into its own singleton atom.
AtomVocabulary cluster_keywords(const GlobalKeywordSet& gks, const EmbeddingMap& embeddings,
                                double theta);

struct AtomDocId {
  std::string doc_key;
  AtomSequence atoms;
};

struct CollisionGroup {
  AtomSequence atoms;
  std::vector<std::string> doc_keys;  // ascending
};

struct CollisionReport {
  std::vector<CollisionGroup> groups;  // every group has >= 2 documents

  bool empty() const { return groups.empty(); }
};

enum class CollisionMode { kPermissive, kStrict };

struct DocIdAssignment {
  std::map<std::string, AtomDocId> docids;  // keyed and ordered by doc_key
  CollisionReport collisions;
};

/// Position-preserving substitution of each keyword by its atom id. In strict
/// mode any two documents sharing a sequence is an error.
DocIdAssignment assign_docids(std::span<const KeywordRecord> records, const AtomVocabulary& vocab,
                              CollisionMode mode = CollisionMode::kPermissive);

using TokenCounter = std::function<std::size_t(std::string_view)>;

struct SpaceReport {
  std::size_t document_count = 0;   // N
  std::size_t keyword_count = 0;    // n distinct keywords
  std::size_t atom_count = 0;       // C
  std::size_t m = 0;
  double vocabulary_compression_ratio = 0.0;  // C / n
  std::size_t distinct_docid_count = 0;
  double log10_naive_space = 0.0;       // log10(N^m)
  double log10_compressed_space = 0.0;  // log10(C^m)
  std::size_t identifier_tokens_baseline = 0;    // sum of token counts of raw keywords
  std::size_t identifier_tokens_compressed = 0;  // N * m, one token per atom
  double identifier_token_reduction = 0.0;       // 1 - compressed / baseline
};

/// Decoding-space and identifier-length accounting. The token counter is
/// pluggable; the default counts whitespace-delimited units and each atom as
/// exactly one token.
SpaceReport docid_space_report(const std::map<std::string, AtomDocId>& docids,
                               const AtomVocabulary& vocab, const GlobalKeywordSet& gks,
                               const TokenCounter& counter = {});

/// JSON rendering of a SpaceReport (one self-delimiting document).
std::string space_report_to_json(const SpaceReport& report);

}  // namespace mgr
