#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mgr/types.hpp"

namespace mgr {

/// Reads the corpus line format: one JSON object per line with string fields
/// `id`, `lang`, `text` and optional `title`. Duplicate ids and malformed
/// lines are hard errors that name the offending line.
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Reads the keyword line format (`id` + `keywords` array) and validates it
/// against the corpus: every document covered exactly once, every record
/// exactly `m` keywords. Keywords are canonicalized (NFC + trim) on load.
std::vector<KeywordRecord> load_keywords(const std::filesystem::path& path,
                                         std::span<const Document> corpus, int m);

/// Same validation against a bare doc_key list (e.g. the keys of a loaded
/// index).
std::vector<KeywordRecord> load_keywords(const std::filesystem::path& path,
                                         std::span<const std::string> doc_keys, int m);

struct EmbeddingLoadReport {
  std::size_t dimension = 0;
  std::size_t loaded = 0;
  std::vector<std::string> extra_keywords;  // present in file, not required
};

/// Reads the embedding line format (`keyword` + `vector` array). All vectors
/// must share one dimension, be finite and have positive norm. Embeddings for
/// keywords outside `required_keywords` are retained and flagged in `report`.
EmbeddingMap load_embeddings(const std::filesystem::path& path,
                             const std::set<std::string>& required_keywords,
                             EmbeddingLoadReport* report = nullptr);

std::vector<QueryRecord> load_queries(const std::filesystem::path& path);

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path);

/// Two-column whitespace-separated qrels: query_key doc_key, one pair per line.
std::map<std::string, std::vector<std::string>> load_qrels(const std::filesystem::path& path);

void save_corpus(const std::filesystem::path& path, std::span<const Document> docs);
void save_keywords(const std::filesystem::path& path, std::span<const KeywordRecord> records);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMap& embeddings);
void save_queries(const std::filesystem::path& path, std::span<const QueryRecord> queries);
void save_training_pairs(const std::filesystem::path& path, std::span<const TrainingPair> pairs);

/// Writes `contents` to a temp file next to `path` and renames it into place.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mgr
