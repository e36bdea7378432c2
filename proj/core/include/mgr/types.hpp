#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mgr {

/// Integer id of one semantic atom (a cluster of equivalent keywords).
using AtomId = std::uint32_t;

/// A document identifier: a fixed-length sequence of atom ids.
using AtomSequence = std::vector<AtomId>;

/// One corpus record. `doc_key` is the external identifier the engine hands
/// back at retrieval time.
struct Document {
  std::string doc_key;
  std::string lang;
  std::string text;
  std::optional<std::string> title;
};

/// The ordered, fixed-length keyword list of one document.
struct KeywordRecord {
  std::string doc_key;
  std::vector<std::string> keywords;
};

/// keyword -> dense vector, one corpus-wide dimension.
using EmbeddingMap = std::map<std::string, std::vector<double>>;

struct QueryRecord {
  std::string query_key;
  std::string lang;
  std::string text;
  std::vector<std::string> relevant_doc_keys;  // may be empty (inference-only)
};

struct TrainingPair {
  std::string query_text;
  std::string target_doc_key;
};

}  // namespace mgr
