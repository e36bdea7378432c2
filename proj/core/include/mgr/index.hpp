#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "mgr/atomizer.hpp"
#include "mgr/trie.hpp"
#include "mgr/types.hpp"

namespace mgr {

inline constexpr int kIndexFormatVersion = 1;

/// A built retrieval index: the atom vocabulary, the DocID map, and the
/// prefix trie derived from them. The trie is never serialized; it is rebuilt
/// on load. Immutable after construction.
class RetrievalIndex {
 public:
  RetrievalIndex(int m, double theta, AtomVocabulary vocab,
                 std::map<std::string, AtomDocId> docids);

  int m() const { return m_; }
  double theta() const { return theta_; }
  std::size_t document_count() const { return docids_.size(); }
  const AtomVocabulary& vocab() const { return vocab_; }
  const std::map<std::string, AtomDocId>& docids() const { return docids_; }
  const PrefixTrie& trie() const { return trie_; }

 private:
  int m_;
  double theta_;
  AtomVocabulary vocab_;
  std::map<std::string, AtomDocId> docids_;
  PrefixTrie trie_;
};

/// Writes the versioned index document (format_version, m, theta, N, atom
/// table, DocID map) atomically.
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);

/// Loads an index file, rebuilding the trie. A format_version mismatch is a
/// hard error.
RetrievalIndex load_index(const std::filesystem::path& path);

}  // namespace mgr
