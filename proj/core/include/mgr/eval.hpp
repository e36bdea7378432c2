#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgr/decoder.hpp"
#include "mgr/index.hpp"
#include "mgr/scorer.hpp"
#include "mgr/types.hpp"

namespace mgr {

/// Fraction of queries with at least one relevant document in the top k.
/// Every query in `results` must have a non-empty qrels entry.
double recall_at_k(const std::map<std::string, std::vector<std::string>>& results,
                   const std::map<std::string, std::vector<std::string>>& qrels, int k);

struct RankedDoc {
  std::string doc_key;
  double log_prob = 0.0;
  AtomSequence atoms;
};

struct LanguageRow {
  std::string lang;
  std::size_t query_count = 0;
  double recall_at_1 = 0.0;
  double recall_at_10 = 0.0;
  std::optional<double> recall_at_100;  // present when width >= 100
};

struct EvalReport {
  std::vector<LanguageRow> rows;  // ascending by language tag
  LanguageRow avg;                // unweighted mean over rows, lang == "AVG"
  std::size_t query_count = 0;
  std::size_t failed_queries = 0;
  int width = 0;
  double decode_total_ms = 0.0;
  double decode_mean_ms = 0.0;
  std::map<std::string, std::vector<RankedDoc>> raw;  // query_key -> ranking
};

/// Beam-decodes every query, resolves DocIDs to documents (collision groups
/// expand in ascending doc_key order, one rank per document), and aggregates
/// Recall@k per query language. A failing query scores zero and is counted,
/// not fatal. Width must cover the largest requested cutoff (10).
EvalReport evaluate(const RetrievalIndex& index, Scorer& scorer,
                    std::span<const QueryRecord> queries, int width);

void write_report(const EvalReport& report, const std::filesystem::path& path);
std::string report_to_json(const EvalReport& report);

enum class SweepParameter { kTheta, kM };

struct SweepInputs {
  std::map<int, std::vector<KeywordRecord>> keywords_by_m;  // m -> records
  const EmbeddingMap* embeddings = nullptr;
  std::span<const QueryRecord> queries;
  std::span<const TrainingPair> training_pairs;  // empty -> uniform scorer
  double theta = 0.8;  // fixed theta for the m sweep
  int m = 3;           // fixed m for the theta sweep
  double alpha = 1.0;
  int width = 10;
  CollisionMode collision_mode = CollisionMode::kPermissive;
};

struct SweepPoint {
  double value = 0.0;
  std::size_t keyword_count = 0;
  std::size_t atom_count = 0;
  std::size_t distinct_docid_count = 0;
  EvalReport report;
};

struct SweepResult {
  std::string parameter;  // "theta" or "m"
  std::vector<SweepPoint> points;
};

/// Rebuilds vocabulary + index per grid value and evaluates. The grid must be
/// strictly increasing; an m sweep requires a keyword file of matching width
/// per grid value.
SweepResult sweep(SweepParameter parameter, std::span<const double> grid,
                  const SweepInputs& inputs);

std::string sweep_to_json(const SweepResult& result);

/// Scores every distinct DocID by summing per-step constrained
/// log-probabilities on the trie and sorts by log-probability, ties by
/// ascending sequence. Guarded against large indexes.
std::vector<RankedDocId> brute_force_rank(const PrefixTrie& trie, Scorer& scorer,
                                          std::string_view query,
                                          std::size_t guard = 10000);

}  // namespace mgr
