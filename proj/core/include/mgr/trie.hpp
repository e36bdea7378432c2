#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mgr/atomizer.hpp"
#include "mgr/types.hpp"

namespace mgr {

/// Prefix trie over the DocID sequences. The children of a prefix are exactly
/// the atoms that extend it toward some document, which is the candidate set
/// of the next decoding step. Immutable after build; safe for concurrent
/// readers.
class PrefixTrie {
 public:
  /// Builds the trie from a doc_key -> AtomDocId map. All sequences must share
  /// one length; the map must be non-empty.
  static PrefixTrie build(const std::map<std::string, AtomDocId>& docids);

  std::size_t depth() const { return depth_; }
  std::size_t document_count() const { return doc_keys_.size(); }
  std::size_t distinct_docid_count() const { return distinct_docids_; }

  /// Children of `prefix`, ascending. Throws on an unreachable prefix and on
  /// a complete one (|prefix| == depth).
  std::vector<AtomId> candidate_atoms(std::span<const AtomId> prefix) const;

  bool contains_prefix(std::span<const AtomId> prefix) const;

  /// Documents whose DocID passes through `prefix`, ascending by doc_key.
  /// For a complete sequence this resolves the DocID to its document set.
  std::vector<std::string> docs_with_prefix(std::span<const AtomId> prefix) const;

  /// All distinct DocID sequences, in ascending lexicographic order.
  std::vector<AtomSequence> all_docids() const;

 private:
  struct Node {
    std::map<AtomId, std::unique_ptr<Node>> children;
    std::vector<std::uint32_t> docs;  // indices into doc_keys_, ascending
  };

  const Node* find(std::span<const AtomId> prefix) const;

  std::unique_ptr<Node> root_;
  std::vector<std::string> doc_keys_;  // ascending
  std::size_t depth_ = 0;
  std::size_t distinct_docids_ = 0;
};

/// Convenience wrapper matching the build operation name.
inline PrefixTrie build_trie(const std::map<std::string, AtomDocId>& docids) {
  return PrefixTrie::build(docids);
}

}  // namespace mgr
