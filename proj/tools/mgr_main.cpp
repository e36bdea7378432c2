// mgr: build atom-sequence document identifiers from multilingual keyword
// files and retrieve documents by constrained multi-step decoding.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mgr/atomizer.hpp"
#include "mgr/corpus.hpp"
#include "mgr/decoder.hpp"
#include "mgr/error.hpp"
#include "mgr/eval.hpp"
#include "mgr/index.hpp"
#include "mgr/scorer.hpp"
#include "mgr/scorer_client.hpp"
#include "mgr/statistical_scorer.hpp"
#include "mgr/synth.hpp"
#include "mgr/trie.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// MGR_LOG={quiet,info,debug}; the one environment knob, everything else is
// flags or config so runs stay reproducible from the command line.
int log_level() {
  static const int level = [] {
    const char* env = std::getenv("MGR_LOG");
    if (env == nullptr) return 1;
    const std::string value(env);
    if (value == "quiet") return 0;
    if (value == "debug") return 2;
    return 1;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "mgr: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "mgr[debug]: " << msg << "\n";
}

struct ScorerChoice {
  std::string kind;  // uniform | statistical | external
  std::string arg;   // path or endpoint
};

ScorerChoice parse_scorer_flag(const std::string& value) {
  if (value == "uniform") return {"uniform", ""};
  if (value.rfind("statistical:", 0) == 0) return {"statistical", value.substr(12)};
  if (value.rfind("external:", 0) == 0) return {"external", value.substr(9)};
  throw mgr::Error("unsupported --scorer \"" + value +
                   "\" (expected uniform, statistical:<path> or external:<endpoint>)");
}

std::unique_ptr<mgr::Scorer> make_scorer(const ScorerChoice& choice, int timeout_ms) {
  if (choice.kind == "uniform") {
    return std::make_unique<mgr::UniformScorer>();
  }
  if (choice.kind == "statistical") {
    return std::make_unique<mgr::StatisticalScorer>(mgr::StatisticalScorer::load(choice.arg));
  }
  mgr::ExternalScorerOptions options;
  options.timeout_ms = timeout_ms;
  return mgr::ExternalScorer::connect(choice.arg, options);
}

void emit(const std::string& text, const std::string& output_path) {
  const bool needs_newline = text.empty() || text.back() != '\n';
  if (output_path.empty()) {
    std::cout << text;
    if (needs_newline) std::cout << '\n';
  } else {
    mgr::atomic_write_file(output_path, needs_newline ? text + "\n" : text);
    log_info("wrote " + output_path);
  }
}

struct BuildArgs {
  std::string corpus, keywords, embeddings, index_out;
  int m = 3;
  double theta = 0.8;
  bool strict_collisions = false;
};

int cmd_build(const BuildArgs& args) {
  const std::vector<mgr::Document> corpus = mgr::load_corpus(args.corpus);
  log_debug("loaded " + std::to_string(corpus.size()) + " documents");
  const std::vector<mgr::KeywordRecord> records =
      mgr::load_keywords(args.keywords, corpus, args.m);
  const mgr::GlobalKeywordSet gks = mgr::build_global_keyword_set(records);

  std::set<std::string> required(gks.keywords.begin(), gks.keywords.end());
  mgr::EmbeddingLoadReport emb_report;
  const mgr::EmbeddingMap embeddings =
      mgr::load_embeddings(args.embeddings, required, &emb_report);
  if (!emb_report.extra_keywords.empty()) {
    log_info(std::to_string(emb_report.extra_keywords.size()) +
             " embedding(s) do not match any corpus keyword");
  }

  const mgr::AtomVocabulary vocab = mgr::cluster_keywords(gks, embeddings, args.theta);
  mgr::DocIdAssignment assignment = mgr::assign_docids(
      records, vocab,
      args.strict_collisions ? mgr::CollisionMode::kStrict : mgr::CollisionMode::kPermissive);
  if (!assignment.collisions.empty()) {
    log_info(std::to_string(assignment.collisions.groups.size()) +
             " DocID collision group(s), resolved permissively");
  }
  const mgr::SpaceReport space =
      mgr::docid_space_report(assignment.docids, vocab, gks);

  mgr::RetrievalIndex index(args.m, args.theta, vocab, std::move(assignment.docids));
  mgr::save_index(index, args.index_out);
  log_info("wrote " + args.index_out);

  std::cout << mgr::space_report_to_json(space) << "\n";
  return 0;
}

struct DecodeArgs {
  std::string index, scorer = "uniform", query, queries, output;
  int width = 10;
  int timeout_ms = 30000;
};

int cmd_decode(const DecodeArgs& args) {
  const mgr::RetrievalIndex index = mgr::load_index(args.index);
  const std::unique_ptr<mgr::Scorer> scorer =
      make_scorer(parse_scorer_flag(args.scorer), args.timeout_ms);

  std::vector<mgr::QueryRecord> queries;
  if (!args.query.empty()) {
    queries.push_back(mgr::QueryRecord{"query", "", args.query, {}});
  } else if (!args.queries.empty()) {
    queries = mgr::load_queries(args.queries);
  } else {
    throw mgr::Error("decode needs --query or --queries");
  }

  std::ostringstream out;
  for (const mgr::QueryRecord& q : queries) {
    const mgr::DecodeResult decoded =
        mgr::decode_beam(index.trie(), *scorer, q.text, args.width);
    ordered_json line;
    line["query"] = q.query_key;
    ordered_json results = nlohmann::json::array();
    for (const mgr::RankedDocId& entry : decoded.ranked) {
      for (const std::string& doc : entry.doc_keys) {
        ordered_json r;
        r["doc"] = doc;
        r["atoms"] = entry.atoms;
        r["log_prob"] = entry.log_prob;
        results.push_back(std::move(r));
      }
    }
    line["results"] = std::move(results);
    out << line.dump() << "\n";
  }
  emit(out.str(), args.output);
  return 0;
}

struct EvalArgs {
  std::string index, scorer = "uniform", queries, qrels, output;
  int width = 10;
  int timeout_ms = 30000;
};

int cmd_eval(const EvalArgs& args) {
  const mgr::RetrievalIndex index = mgr::load_index(args.index);
  const std::unique_ptr<mgr::Scorer> scorer =
      make_scorer(parse_scorer_flag(args.scorer), args.timeout_ms);
  std::vector<mgr::QueryRecord> queries = mgr::load_queries(args.queries);
  if (!args.qrels.empty()) {
    const auto qrels = mgr::load_qrels(args.qrels);
    for (mgr::QueryRecord& q : queries) {
      const auto it = qrels.find(q.query_key);
      q.relevant_doc_keys = it == qrels.end() ? std::vector<std::string>{} : it->second;
    }
  }
  const mgr::EvalReport report = mgr::evaluate(index, *scorer, queries, args.width);
  emit(mgr::report_to_json(report), args.output);
  return 0;
}

struct StatsArgs {
  std::string index, keywords, output;
};

int cmd_stats(const StatsArgs& args) {
  const mgr::RetrievalIndex index = mgr::load_index(args.index);
  std::vector<std::string> doc_keys;
  doc_keys.reserve(index.document_count());
  for (const auto& [key, _] : index.docids()) doc_keys.push_back(key);
  const std::vector<mgr::KeywordRecord> records =
      mgr::load_keywords(args.keywords, doc_keys, index.m());
  const mgr::GlobalKeywordSet gks = mgr::build_global_keyword_set(records);
  const mgr::SpaceReport space = mgr::docid_space_report(index.docids(), index.vocab(), gks);
  emit(mgr::space_report_to_json(space), args.output);
  return 0;
}

struct SynthArgs {
  mgr::SynthSpec spec;
  std::string out_dir = "synth";
};

int cmd_synth(const SynthArgs& args) {
  const mgr::SynthCorpus corpus = mgr::generate_synthetic_corpus(args.spec);
  mgr::write_synthetic_corpus(corpus, args.spec, args.out_dir);
  log_info("wrote " + std::to_string(corpus.documents.size()) + " documents, " +
           std::to_string(corpus.queries.size()) + " queries to " + args.out_dir);
  return 0;
}

struct TrainArgs {
  std::string index, pairs, output;
  double alpha = 1.0;
};

int cmd_train_scorer(const TrainArgs& args) {
  const mgr::RetrievalIndex index = mgr::load_index(args.index);
  const std::vector<mgr::TrainingPair> pairs = mgr::load_training_pairs(args.pairs);
  const mgr::StatisticalScorer scorer =
      mgr::StatisticalScorer::train(pairs, index.docids(), index.vocab(), args.alpha);
  scorer.save(args.output);
  log_info("trained on " + std::to_string(pairs.size()) + " pairs, wrote " + args.output);
  return 0;
}

struct SweepArgs {
  std::string parameter = "theta";
  std::vector<double> grid;
  std::string corpus, keywords, embeddings, queries, pairs, output;
  std::vector<std::string> keywords_m;  // "M=path" entries for the m sweep
  double theta = 0.8;
  int m = 3;
  double alpha = 1.0;
  int width = 10;
};

int cmd_sweep(const SweepArgs& args) {
  const std::vector<mgr::Document> corpus = mgr::load_corpus(args.corpus);

  mgr::SweepInputs inputs;
  mgr::SweepParameter parameter;
  if (args.parameter == "theta") {
    parameter = mgr::SweepParameter::kTheta;
    if (args.keywords.empty()) throw mgr::Error("theta sweep needs --keywords");
    inputs.keywords_by_m[args.m] = mgr::load_keywords(args.keywords, corpus, args.m);
  } else if (args.parameter == "m") {
    parameter = mgr::SweepParameter::kM;
    if (args.keywords_m.empty()) {
      throw mgr::Error("m sweep needs one --keywords-m M=PATH per grid value");
    }
    for (const std::string& entry : args.keywords_m) {
      const std::size_t eq = entry.find('=');
      if (eq == std::string::npos) {
        throw mgr::Error("--keywords-m expects M=PATH, got \"" + entry + "\"");
      }
      const int m = std::stoi(entry.substr(0, eq));
      inputs.keywords_by_m[m] = mgr::load_keywords(entry.substr(eq + 1), corpus, m);
    }
  } else {
    throw mgr::Error("--parameter must be theta or m");
  }

  std::set<std::string> required;
  for (const auto& [_, records] : inputs.keywords_by_m) {
    for (const mgr::KeywordRecord& rec : records) {
      required.insert(rec.keywords.begin(), rec.keywords.end());
    }
  }
  const mgr::EmbeddingMap embeddings = mgr::load_embeddings(args.embeddings, required);
  const std::vector<mgr::QueryRecord> queries = mgr::load_queries(args.queries);
  std::vector<mgr::TrainingPair> pairs;
  if (!args.pairs.empty()) pairs = mgr::load_training_pairs(args.pairs);

  inputs.embeddings = &embeddings;
  inputs.queries = queries;
  inputs.training_pairs = pairs;
  inputs.theta = args.theta;
  inputs.m = args.m;
  inputs.alpha = args.alpha;
  inputs.width = args.width;

  const mgr::SweepResult result = mgr::sweep(parameter, args.grid, inputs);
  emit(mgr::sweep_to_json(result), args.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative retrieval over clustered multilingual keyword atoms"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file; flags override config values");

  BuildArgs build_args;
  CLI::App* build = app.add_subcommand("build", "Cluster keywords and build the DocID index");
  build->add_option("--corpus", build_args.corpus, "Corpus JSONL")->required();
  build->add_option("--keywords", build_args.keywords, "Keyword JSONL")->required();
  build->add_option("--embeddings", build_args.embeddings, "Embedding JSONL")->required();
  build->add_option("--index", build_args.index_out, "Output index path")->required();
  build->add_option("--m", build_args.m, "Keywords per document");
  build->add_option("--theta", build_args.theta, "Clustering similarity threshold");
  build->add_flag("--strict-collisions", build_args.strict_collisions,
                  "Fail on DocID collisions");

  DecodeArgs decode_args;
  CLI::App* decode = app.add_subcommand("decode", "Decode queries against an index");
  decode->add_option("--index", decode_args.index, "Index path")->required();
  decode->add_option("--scorer", decode_args.scorer,
                     "uniform | statistical:<path> | external:<endpoint>");
  decode->add_option("--query", decode_args.query, "Single query text");
  decode->add_option("--queries", decode_args.queries, "Query JSONL");
  decode->add_option("--width", decode_args.width, "Beam width");
  decode->add_option("--timeout-ms", decode_args.timeout_ms, "External scorer timeout");
  decode->add_option("--output", decode_args.output, "Output path (default stdout)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate Recall@k per query language");
  eval->add_option("--index", eval_args.index, "Index path")->required();
  eval->add_option("--queries", eval_args.queries, "Query JSONL with relevance")->required();
  eval->add_option("--qrels", eval_args.qrels, "Two-column qrels file (overrides relevance)");
  eval->add_option("--scorer", eval_args.scorer,
                   "uniform | statistical:<path> | external:<endpoint>");
  eval->add_option("--width", eval_args.width, "Beam width");
  eval->add_option("--timeout-ms", eval_args.timeout_ms, "External scorer timeout");
  eval->add_option("--output", eval_args.output, "Report path (default stdout)");

  StatsArgs stats_args;
  CLI::App* stats = app.add_subcommand("stats", "Space and compression report for an index");
  stats->add_option("--index", stats_args.index, "Index path")->required();
  stats->add_option("--keywords", stats_args.keywords, "Keyword JSONL")->required();
  stats->add_option("--output", stats_args.output, "Output path (default stdout)");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a deterministic synthetic corpus");
  synth->add_option("--concepts", synth_args.spec.concepts, "Concept count");
  synth->add_option("--languages", synth_args.spec.languages, "Language count");
  synth->add_option("--docs-per-cell", synth_args.spec.docs_per_cell,
                    "Documents per concept-language cell");
  synth->add_option("--m", synth_args.spec.m, "Keywords per document");
  synth->add_option("--dim", synth_args.spec.dim, "Embedding dimension");
  synth->add_option("--intra-min", synth_args.spec.intra_min_cosine,
                    "Minimum intra-group cosine");
  synth->add_option("--inter-max", synth_args.spec.inter_max_cosine,
                    "Maximum inter-group cosine");
  synth->add_option("--seed", synth_args.spec.seed, "Deterministic seed");
  synth->add_option("--out", synth_args.out_dir, "Output directory");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train-scorer", "Train the statistical scorer");
  train->add_option("--index", train_args.index, "Index path")->required();
  train->add_option("--pairs", train_args.pairs, "Training-pair JSONL")->required();
  train->add_option("--alpha", train_args.alpha, "Additive smoothing");
  train->add_option("--output", train_args.output, "Scorer output path")->required();

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep", "Rebuild and evaluate across a parameter grid");
  sweep->add_option("--parameter", sweep_args.parameter, "theta or m");
  sweep->add_option("--grid", sweep_args.grid, "Grid values, strictly increasing")
      ->required()
      ->delimiter(',');
  sweep->add_option("--corpus", sweep_args.corpus, "Corpus JSONL")->required();
  sweep->add_option("--keywords", sweep_args.keywords, "Keyword JSONL (theta sweep)");
  sweep->add_option("--keywords-m", sweep_args.keywords_m, "M=PATH keyword files (m sweep)");
  sweep->add_option("--embeddings", sweep_args.embeddings, "Embedding JSONL")->required();
  sweep->add_option("--queries", sweep_args.queries, "Query JSONL with relevance")->required();
  sweep->add_option("--pairs", sweep_args.pairs,
                    "Training pairs; enables the statistical scorer per point");
  sweep->add_option("--theta", sweep_args.theta, "Fixed theta for the m sweep");
  sweep->add_option("--m", sweep_args.m, "Fixed m for the theta sweep");
  sweep->add_option("--alpha", sweep_args.alpha, "Additive smoothing");
  sweep->add_option("--width", sweep_args.width, "Beam width");
  sweep->add_option("--output", sweep_args.output, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return cmd_build(build_args);
    if (decode->parsed()) return cmd_decode(decode_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (stats->parsed()) return cmd_stats(stats_args);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (train->parsed()) return cmd_train_scorer(train_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
  } catch (const std::exception& e) {
    std::cerr << "mgr: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
