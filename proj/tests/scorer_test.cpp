#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mgr/decoder.hpp"
#include "mgr/error.hpp"
#include "mgr/statistical_scorer.hpp"
#include "mgr/synth.hpp"
#include "mgr/text.hpp"
#include "mgr/trie.hpp"

using namespace mgr;

namespace {

AtomVocabulary two_atom_vocab() {
  AtomVocabulary vocab;
  vocab.atoms = {Atom{0, "a", {"a"}}, Atom{1, "b", {"b"}}};
  vocab.keyword_to_atom = {{"a", 0}, {"b", 1}};
  return vocab;
}

std::map<std::string, AtomDocId> docids_from(const std::vector<AtomSequence>& sequences) {
  std::map<std::string, AtomDocId> docids;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const std::string key = "d" + std::to_string(i);
    docids.emplace(key, AtomDocId{key, sequences[i]});
  }
  return docids;
}

}  // namespace

TEST_CASE("a single pair ranks its target atom above unseen atoms") {
  // Two single-atom DocIDs; one pair targets atom 0. The hand-computed ratio
  // between the trained and untrained atom follows the smoothed formula with
  // equal priors: each of the V distinct terms contributes
  // (1+alpha)/(1+alpha*V) against alpha/(alpha*V).
  const auto docids = docids_from({{0}, {1}});
  const std::vector<TrainingPair> pairs{{"capital australia", "d0"}};
  StatisticalScorer scorer = StatisticalScorer::train(pairs, docids, two_atom_vocab(), 1.0);

  const std::vector<std::string> terms = extract_terms("capital australia");
  const double v = static_cast<double>(scorer.distinct_terms());
  CHECK(v == 14);  // 2 tokens + 12 trigrams, all distinct

  const std::vector<double> scores =
      scorer.score("capital australia", {}, std::vector<AtomId>{0, 1});
  REQUIRE(scores.size() == 2);
  CHECK(scores[0] > scores[1]);
  CHECK(scores[1] > 0.0);

  // Hand computation: priors cancel (1/2 each); every term is seen once with
  // atom 0 and never with atom 1; count(atom0, t) = 1 pair.
  const double per_term_trained = (1.0 + 1.0) / (1.0 + v);
  const double per_term_unseen = 1.0 / v;
  const double expected_ratio = std::pow(per_term_trained / per_term_unseen,
                                         static_cast<double>(terms.size()));
  CHECK(scores[0] / scores[1] == doctest::Approx(expected_ratio).epsilon(1e-9));
}

TEST_CASE("empty query text reduces scores to the position priors") {
  // Atom 0 appears at position 0 in two of three DocIDs.
  const auto docids = docids_from({{0}, {0}, {1}});
  const std::vector<TrainingPair> pairs{{"some text", "d0"}};
  StatisticalScorer scorer = StatisticalScorer::train(pairs, docids, two_atom_vocab(), 1.0);
  const std::vector<double> scores = scorer.score("", {}, std::vector<AtomId>{0, 1});
  CHECK(scores[0] / scores[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("duplicated training pairs leave the per-step argmax unchanged") {
  const auto docids = docids_from({{0}, {1}});
  const std::vector<TrainingPair> once{{"west wind", "d0"}, {"east tide", "d1"}};
  const std::vector<TrainingPair> twice{{"west wind", "d0"}, {"west wind", "d0"},
                                        {"east tide", "d1"}, {"east tide", "d1"}};
  StatisticalScorer scorer_once = StatisticalScorer::train(once, docids, two_atom_vocab(), 1.0);
  StatisticalScorer scorer_twice = StatisticalScorer::train(twice, docids, two_atom_vocab(), 1.0);

  for (const std::string query : {"west wind", "east tide", "west", "tide", ""}) {
    const auto a = scorer_once.score(query, {}, std::vector<AtomId>{0, 1});
    const auto b = scorer_twice.score(query, {}, std::vector<AtomId>{0, 1});
    CHECK((a[0] > a[1]) == (b[0] > b[1]));
    CHECK((a[0] < a[1]) == (b[0] < b[1]));
  }
}

TEST_CASE("training validates inputs") {
  const auto docids = docids_from({{0}});
  AtomVocabulary vocab = two_atom_vocab();
  CHECK_THROWS_AS(StatisticalScorer::train({}, docids, vocab, 1.0), Error);
  const std::vector<TrainingPair> bad_target{{"q", "missing-doc"}};
  CHECK_THROWS_WITH_AS(StatisticalScorer::train(bad_target, docids, vocab, 1.0),
                       doctest::Contains("missing-doc"), Error);
  const std::vector<TrainingPair> pairs{{"q", "d0"}};
  CHECK_THROWS_AS(StatisticalScorer::train(pairs, docids, vocab, 0.0), Error);
  CHECK_THROWS_AS(StatisticalScorer::train(pairs, docids, vocab, -1.0), Error);
}

TEST_CASE("scoring rejects prefixes beyond the trained length") {
  const auto docids = docids_from({{0, 1}, {1, 0}});
  const std::vector<TrainingPair> pairs{{"q", "d0"}};
  StatisticalScorer scorer = StatisticalScorer::train(pairs, docids, two_atom_vocab(), 1.0);
  const AtomSequence long_prefix{0, 1};
  CHECK_THROWS_AS(scorer.score("q", long_prefix, std::vector<AtomId>{0}), Error);
}

TEST_CASE("save and load reproduce scores bitwise") {
  const SynthSpec spec{.concepts = 2, .languages = 2, .docs_per_cell = 2, .m = 3,
                       .dim = 8, .seed = 5};
  const SynthCorpus corpus = generate_synthetic_corpus(spec);
  const GlobalKeywordSet gks = build_global_keyword_set(corpus.keywords);
  const AtomVocabulary vocab = cluster_keywords(gks, corpus.embeddings, 0.8);
  DocIdAssignment assignment = assign_docids(corpus.keywords, vocab);
  StatisticalScorer trained =
      StatisticalScorer::train(corpus.training_pairs, assignment.docids, vocab, 0.7);

  const auto path = std::filesystem::temp_directory_path() /
                    ("mgr_scorer_" + std::to_string(::getpid()) + ".json");
  trained.save(path);
  StatisticalScorer loaded = StatisticalScorer::load(path);
  std::filesystem::remove(path);

  const PrefixTrie trie = build_trie(assignment.docids);
  for (const QueryRecord& q : corpus.queries) {
    AtomSequence prefix;
    for (std::size_t t = 0; t < trie.depth(); ++t) {
      const auto candidates = trie.candidate_atoms(prefix);
      const auto a = trained.score(q.text, prefix, candidates);
      const auto b = loaded.score(q.text, prefix, candidates);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
      prefix.push_back(candidates[0]);
    }
  }
}

TEST_CASE("the trained scorer reproduces memorized targets greedily") {
  const SynthSpec spec{.concepts = 4, .languages = 1, .docs_per_cell = 1, .m = 3,
                       .dim = 16, .seed = 21};
  const SynthCorpus corpus = generate_synthetic_corpus(spec);
  const GlobalKeywordSet gks = build_global_keyword_set(corpus.keywords);
  const AtomVocabulary vocab = cluster_keywords(gks, corpus.embeddings, 0.8);
  DocIdAssignment assignment = assign_docids(corpus.keywords, vocab);
  REQUIRE(assignment.collisions.empty());  // collision-free fixture
  StatisticalScorer scorer =
      StatisticalScorer::train(corpus.training_pairs, assignment.docids, vocab, 1.0);
  const PrefixTrie trie = build_trie(assignment.docids);

  for (const TrainingPair& pair : corpus.training_pairs) {
    const DecodeResult result = decode_greedy(trie, scorer, pair.query_text);
    CHECK(result.ranked[0].atoms == assignment.docids.at(pair.target_doc_key).atoms);
  }
}

TEST_CASE("loading a scorer with a bad version or shape fails") {
  const auto path = std::filesystem::temp_directory_path() /
                    ("mgr_scorer_bad_" + std::to_string(::getpid()) + ".json");
  {
    std::ofstream out(path);
    out << "{\"format_version\": 99}";
  }
  CHECK_THROWS_WITH_AS(StatisticalScorer::load(path), doctest::Contains("version"), Error);
  {
    std::ofstream out(path);
    out << "not json";
  }
  CHECK_THROWS_AS(StatisticalScorer::load(path), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(StatisticalScorer::load(path), Error);  // missing file
}
