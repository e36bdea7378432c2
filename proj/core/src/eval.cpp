#include "mgr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "mgr/corpus.hpp"
#include "mgr/error.hpp"
#include "mgr/statistical_scorer.hpp"

namespace mgr {

double recall_at_k(const std::map<std::string, std::vector<std::string>>& results,
                   const std::map<std::string, std::vector<std::string>>& qrels, int k) {
  if (k < 1) {
    throw Error("recall cutoff k must be >= 1");
  }
  if (results.empty()) {
    throw Error("empty query set");
  }
  std::size_t hits = 0;
  for (const auto& [query_key, ranked] : results) {
    const auto it = qrels.find(query_key);
    if (it == qrels.end() || it->second.empty()) {
      throw Error("query \"" + query_key + "\" has no qrels");
    }
    const std::set<std::string> relevant(it->second.begin(), it->second.end());
    const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
      if (relevant.count(ranked[i])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

namespace {

// Collision groups expand into consecutive ranks, ascending doc_key.
std::vector<RankedDoc> flatten_ranking(const DecodeResult& decoded) {
  std::vector<RankedDoc> docs;
  for (const RankedDocId& entry : decoded.ranked) {
    for (const std::string& key : entry.doc_keys) {
      docs.push_back(RankedDoc{key, entry.log_prob, entry.atoms});
    }
  }
  return docs;
}

double recall_from_raw(const std::map<std::string, std::vector<RankedDoc>>& raw,
                       const std::map<std::string, std::vector<std::string>>& qrels, int k,
                       const std::vector<std::string>& keys) {
  std::size_t hits = 0;
  for (const std::string& query_key : keys) {
    const auto& ranked = raw.at(query_key);
    const auto& relevant_list = qrels.at(query_key);
    const std::set<std::string> relevant(relevant_list.begin(), relevant_list.end());
    const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
      if (relevant.count(ranked[i].doc_key)) {
        ++hits;
        break;
      }
    }
  }
  return keys.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(keys.size());
}

}  // namespace

EvalReport evaluate(const RetrievalIndex& index, Scorer& scorer,
                    std::span<const QueryRecord> queries, int width) {
  if (queries.empty()) {
    throw Error("empty query set");
  }
  if (width < 10) {
    throw Error("evaluation width must be >= 10 to compute Recall@10");
  }
  std::map<std::string, std::vector<std::string>> qrels;
  for (const QueryRecord& q : queries) {
    if (q.relevant_doc_keys.empty()) {
      throw Error("query \"" + q.query_key + "\" has no relevant documents");
    }
    qrels[q.query_key] = q.relevant_doc_keys;
  }

  EvalReport report;
  report.width = width;
  report.query_count = queries.size();
  const bool with_100 = width >= 100;

  // Sorted by query_key so assembly order is deterministic regardless of
  // input order or any internal parallelism.
  std::vector<const QueryRecord*> ordered;
  ordered.reserve(queries.size());
  for (const QueryRecord& q : queries) ordered.push_back(&q);
  std::sort(ordered.begin(), ordered.end(),
            [](const QueryRecord* a, const QueryRecord* b) { return a->query_key < b->query_key; });

  std::map<std::string, std::vector<std::string>> keys_by_lang;
  const auto start = std::chrono::steady_clock::now();
  for (const QueryRecord* q : ordered) {
    std::vector<RankedDoc> ranking;
    try {
      const DecodeResult decoded = decode_beam(index.trie(), scorer, q->text, width);
      ranking = flatten_ranking(decoded);
    } catch (const Error&) {
      ++report.failed_queries;  // scores zero, batch continues
    }
    report.raw.emplace(q->query_key, std::move(ranking));
    keys_by_lang[q->lang].push_back(q->query_key);
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  report.decode_total_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
  report.decode_mean_ms = report.decode_total_ms / static_cast<double>(queries.size());

  for (const auto& [lang, keys] : keys_by_lang) {
    LanguageRow row;
    row.lang = lang;
    row.query_count = keys.size();
    row.recall_at_1 = recall_from_raw(report.raw, qrels, 1, keys);
    row.recall_at_10 = recall_from_raw(report.raw, qrels, 10, keys);
    if (with_100) row.recall_at_100 = recall_from_raw(report.raw, qrels, 100, keys);
    report.rows.push_back(std::move(row));
  }

  report.avg.lang = "AVG";
  report.avg.query_count = queries.size();
  for (const LanguageRow& row : report.rows) {
    report.avg.recall_at_1 += row.recall_at_1;
    report.avg.recall_at_10 += row.recall_at_10;
    if (with_100) {
      report.avg.recall_at_100 =
          report.avg.recall_at_100.value_or(0.0) + row.recall_at_100.value();
    }
  }
  const double rows_n = static_cast<double>(report.rows.size());
  report.avg.recall_at_1 /= rows_n;
  report.avg.recall_at_10 /= rows_n;
  if (with_100) report.avg.recall_at_100 = report.avg.recall_at_100.value() / rows_n;
  return report;
}

namespace {

nlohmann::ordered_json row_to_json(const LanguageRow& row) {
  nlohmann::ordered_json obj;
  obj["lang"] = row.lang;
  obj["query_count"] = row.query_count;
  obj["recall_at_1"] = row.recall_at_1;
  obj["recall_at_10"] = row.recall_at_10;
  if (row.recall_at_100) obj["recall_at_100"] = *row.recall_at_100;
  return obj;
}

nlohmann::ordered_json report_to_json_obj(const EvalReport& report) {
  nlohmann::ordered_json obj;
  obj["query_count"] = report.query_count;
  obj["failed_queries"] = report.failed_queries;
  obj["width"] = report.width;
  nlohmann::ordered_json rows = nlohmann::json::array();
  for (const LanguageRow& row : report.rows) rows.push_back(row_to_json(row));
  obj["rows"] = std::move(rows);
  obj["avg"] = row_to_json(report.avg);
  obj["decode_total_ms"] = report.decode_total_ms;
  obj["decode_mean_ms"] = report.decode_mean_ms;

  nlohmann::json raw = nlohmann::json::object();
  for (const auto& [query_key, ranking] : report.raw) {
    nlohmann::json entries = nlohmann::json::array();
    for (const RankedDoc& doc : ranking) {
      nlohmann::json e;
      e["doc"] = doc.doc_key;
      e["log_prob"] = doc.log_prob;
      e["atoms"] = doc.atoms;
      entries.push_back(std::move(e));
    }
    raw[query_key] = std::move(entries);
  }
  obj["raw"] = std::move(raw);
  return obj;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  return report_to_json_obj(report).dump(2);
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  atomic_write_file(path, report_to_json(report) + "\n");
}

SweepResult sweep(SweepParameter parameter, std::span<const double> grid,
                  const SweepInputs& inputs) {
  if (grid.empty()) {
    throw Error("sweep grid must be non-empty");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw Error("sweep grid values must be strictly increasing");
    }
  }
  if (inputs.embeddings == nullptr) {
    throw Error("sweep requires embeddings");
  }

  SweepResult result;
  result.parameter = parameter == SweepParameter::kTheta ? "theta" : "m";
  for (const double value : grid) {
    double theta = inputs.theta;
    int m = inputs.m;
    if (parameter == SweepParameter::kTheta) {
      theta = value;
    } else {
      m = static_cast<int>(value);
      if (static_cast<double>(m) != value) {
        throw Error("m grid values must be integers");
      }
    }
    const auto kw_it = inputs.keywords_by_m.find(m);
    if (kw_it == inputs.keywords_by_m.end()) {
      throw Error("no keyword records of width m = " + std::to_string(m) + " provided");
    }
    const std::vector<KeywordRecord>& records = kw_it->second;

    const GlobalKeywordSet gks = build_global_keyword_set(records);
    const AtomVocabulary vocab = cluster_keywords(gks, *inputs.embeddings, theta);
    DocIdAssignment assignment = assign_docids(records, vocab, inputs.collision_mode);
    RetrievalIndex index(m, theta, vocab, std::move(assignment.docids));

    SweepPoint point;
    point.value = value;
    point.keyword_count = gks.size();
    point.atom_count = vocab.atom_count();
    point.distinct_docid_count = index.trie().distinct_docid_count();

    if (!inputs.training_pairs.empty()) {
      StatisticalScorer scorer =
          StatisticalScorer::train(inputs.training_pairs, index.docids(),
                                   index.vocab(), inputs.alpha);
      point.report = evaluate(index, scorer, inputs.queries, inputs.width);
    } else {
      UniformScorer scorer;
      point.report = evaluate(index, scorer, inputs.queries, inputs.width);
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

std::string sweep_to_json(const SweepResult& result) {
  nlohmann::ordered_json obj;
  obj["parameter"] = result.parameter;
  nlohmann::ordered_json points = nlohmann::json::array();
  for (const SweepPoint& point : result.points) {
    nlohmann::ordered_json p;
    p["value"] = point.value;
    p["keyword_count"] = point.keyword_count;
    p["atom_count"] = point.atom_count;
    p["distinct_docid_count"] = point.distinct_docid_count;
    p["report"] = report_to_json_obj(point.report);
    points.push_back(std::move(p));
  }
  obj["points"] = std::move(points);
  return obj.dump(2);
}

std::vector<RankedDocId> brute_force_rank(const PrefixTrie& trie, Scorer& scorer,
                                          std::string_view query, std::size_t guard) {
  if (trie.distinct_docid_count() > guard) {
    throw Error("brute-force guard exceeded: " + std::to_string(trie.distinct_docid_count()) +
                " DocIDs > " + std::to_string(guard));
  }
  std::vector<RankedDocId> ranked;
  for (const AtomSequence& sequence : trie.all_docids()) {
    double log_prob = 0.0;
    AtomSequence prefix;
    prefix.reserve(sequence.size());
    for (const AtomId atom : sequence) {
      const std::vector<AtomId> candidates = trie.candidate_atoms(prefix);
      const StepDistribution dist = step_distribution(scorer, query, prefix, candidates);
      const auto it = std::find(dist.candidates.begin(), dist.candidates.end(), atom);
      log_prob += dist.log_probs[static_cast<std::size_t>(it - dist.candidates.begin())];
      prefix.push_back(atom);
    }
    RankedDocId entry;
    entry.atoms = sequence;
    entry.log_prob = log_prob;
    entry.doc_keys = trie.docs_with_prefix(sequence);
    ranked.push_back(std::move(entry));
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedDocId& a, const RankedDocId& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.atoms < b.atoms;
  });
  return ranked;
}

}  // namespace mgr
