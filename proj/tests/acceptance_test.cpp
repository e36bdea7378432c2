// Acceptance suite: each criterion prints exactly one PASS/FAIL line. The
// binary exits nonzero if any criterion fails.

#include <sys/types.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mgr/decoder.hpp"
#include "mgr/error.hpp"
#include "mgr/eval.hpp"
#include "mgr/index.hpp"
#include "mgr/scorer.hpp"
#include "mgr/scorer_client.hpp"
#include "mgr/statistical_scorer.hpp"
#include "mgr/synth.hpp"
#include "mgr/trie.hpp"
#include "support/test_util.hpp"

using namespace mgr;
namespace fs = std::filesystem;

#ifndef MGR_STUB_PATH
#error "MGR_STUB_PATH must point at the mgr-scorer-stub binary"
#endif

namespace {

struct Failure {
  std::string details;
};

void require(bool condition, const std::string& details) {
  if (!condition) throw Failure{details};
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

RetrievalIndex build_index(const SynthCorpus& corpus, double theta, int m) {
  const GlobalKeywordSet gks = build_global_keyword_set(corpus.keywords);
  const AtomVocabulary vocab = cluster_keywords(gks, corpus.embeddings, theta);
  DocIdAssignment assignment = assign_docids(corpus.keywords, vocab);
  return RetrievalIndex(m, theta, vocab, std::move(assignment.docids));
}

bool same_result(const DecodeResult& a, const DecodeResult& b, bool bitwise_logprob,
                 double tolerance = 1e-9) {
  if (a.ranked.size() != b.ranked.size()) return false;
  for (std::size_t i = 0; i < a.ranked.size(); ++i) {
    if (a.ranked[i].atoms != b.ranked[i].atoms) return false;
    if (a.ranked[i].doc_keys != b.ranked[i].doc_keys) return false;
    if (bitwise_logprob) {
      if (a.ranked[i].log_prob != b.ranked[i].log_prob) return false;
    } else if (std::abs(a.ranked[i].log_prob - b.ranked[i].log_prob) > tolerance) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 1: constraint soundness and completeness on 200 random indexes.
// ---------------------------------------------------------------------------
std::string constraint_soundness() {
  auto rng = make_rng(0xC0FFEE);
  const auto start = std::chrono::steady_clock::now();
  std::size_t prefixes_checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    const std::uint32_t atom_range = 2 + rng() % 40;
    const auto docids = test_util::random_docids(rng, n, 3, atom_range);
    const PrefixTrie trie = build_trie(docids);

    std::set<AtomSequence> prefixes{{}};
    for (const auto& [_, docid] : docids) {
      prefixes.insert({docid.atoms[0]});
      prefixes.insert({docid.atoms[0], docid.atoms[1]});
    }
    for (const AtomSequence& prefix : prefixes) {
      const auto expected = test_util::brute_force_children(docids, prefix);
      const auto actual = trie.candidate_atoms(prefix);
      require(actual == expected, "candidate mismatch at trial " + std::to_string(trial));
      ++prefixes_checked;
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(seconds < 120.0, "exceeded the 2-minute budget: " + std::to_string(seconds) + "s");
  std::ostringstream out;
  out << "200 indexes, " << prefixes_checked << " prefixes, " << std::fixed << seconds << "s";
  return out.str();
}

// ---------------------------------------------------------------------------
// Criterion 2: every decoded sequence is a DocID of its index (1000 decodes).
// ---------------------------------------------------------------------------
std::string decode_validity() {
  auto rng = make_rng(0xDEC0DE);
  std::size_t decodes = 0;

  const auto check_result = [&](const DecodeResult& result, const std::set<AtomSequence>& valid) {
    for (const RankedDocId& entry : result.ranked) {
      require(valid.count(entry.atoms) == 1, "decoded sequence not in the index");
      require(!entry.doc_keys.empty(), "decoded sequence resolves to no documents");
    }
    ++decodes;
  };

  // Random indexes with uniform and table scorers.
  for (int trial = 0; trial < 32; ++trial) {
    const auto docids = test_util::random_docids(rng, 2 + rng() % 80, 3, 2 + rng() % 12);
    std::set<AtomSequence> valid;
    for (const auto& [_, docid] : docids) valid.insert(docid.atoms);
    const PrefixTrie trie = build_trie(docids);

    UniformScorer uniform;
    TableScorer table(1.0);
    for (const auto& [_, docid] : docids) {
      AtomSequence prefix;
      for (const AtomId atom : docid.atoms) {
        table.set(prefix, atom, 1.0 + static_cast<double>(rng() % 9));
        prefix.push_back(atom);
      }
    }
    for (Scorer* scorer : std::initializer_list<Scorer*>{&uniform, &table}) {
      check_result(decode_greedy(trie, *scorer, "q"), valid);
      for (int width = 1; width <= 10; ++width) {
        check_result(decode_beam(trie, *scorer, "q", width), valid);
      }
    }
  }

  // Synthetic fixtures with trained statistical scorers.
  for (int trial = 0; trial < 4; ++trial) {
    const SynthSpec spec{.concepts = 2 + trial, .languages = 2, .docs_per_cell = 2, .m = 3,
                         .dim = 32, .seed = 900 + static_cast<std::uint64_t>(trial)};
    const SynthCorpus corpus = generate_synthetic_corpus(spec);
    const RetrievalIndex index = build_index(corpus, 0.8, spec.m);
    std::set<AtomSequence> valid;
    for (const auto& [_, docid] : index.docids()) valid.insert(docid.atoms);
    StatisticalScorer scorer =
        StatisticalScorer::train(corpus.training_pairs, index.docids(), index.vocab(), 1.0);
    for (const QueryRecord& query : corpus.queries) {
      check_result(decode_greedy(index.trie(), scorer, query.text), valid);
      for (int width = 1; width <= 10; ++width) {
        check_result(decode_beam(index.trie(), scorer, query.text, width), valid);
      }
    }
  }

  require(decodes >= 1000, "only " + std::to_string(decodes) + " decodes exercised");
  return std::to_string(decodes) + " decodes, zero violations";
}

// ---------------------------------------------------------------------------
// Criterion 3: exhaustive beam equals brute_force_rank on >= 50 instances.
// ---------------------------------------------------------------------------
std::string oracle_equivalence() {
  auto rng = make_rng(0x0A0C1E);
  int instances = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto docids = test_util::random_docids(rng, 2 + rng() % 90, 3, 2 + rng() % 7);
    const PrefixTrie trie = build_trie(docids);
    if (trie.distinct_docid_count() > 100) continue;
    test_util::HashScorer scorer(rng());
    const std::string query = "oracle " + std::to_string(trial);
    const auto oracle = brute_force_rank(trie, scorer, query);
    const DecodeResult beam =
        decode_beam(trie, scorer, query, static_cast<int>(trie.distinct_docid_count()));
    require(oracle.size() == beam.ranked.size(), "ranking sizes differ");
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      require(oracle[i].atoms == beam.ranked[i].atoms,
              "sequence order differs at rank " + std::to_string(i));
      require(oracle[i].log_prob == beam.ranked[i].log_prob,
              "log-prob differs at rank " + std::to_string(i));
      require(oracle[i].doc_keys == beam.ranked[i].doc_keys,
              "resolved documents differ at rank " + std::to_string(i));
    }
    ++instances;
  }
  require(instances >= 50, "only " + std::to_string(instances) + " instances qualified");
  return std::to_string(instances) + " instances, identical rankings";
}

// ---------------------------------------------------------------------------
// Criterion 4: clustering recovers the constructed concept-slot partition.
// ---------------------------------------------------------------------------
std::string clustering_correctness() {
  const SynthSpec spec{.concepts = 3, .languages = 4, .docs_per_cell = 5, .m = 3, .dim = 16,
                       .intra_min_cosine = 0.95, .inter_max_cosine = 0.30, .seed = 404};
  const SynthCorpus corpus = generate_synthetic_corpus(spec);
  const GlobalKeywordSet gks = build_global_keyword_set(corpus.keywords);
  const AtomVocabulary vocab = cluster_keywords(gks, corpus.embeddings, 0.8);

  const std::size_t expected_c = static_cast<std::size_t>(spec.concepts * spec.m);
  require(vocab.atom_count() == expected_c,
          "C = " + std::to_string(vocab.atom_count()) + ", expected " +
              std::to_string(expected_c));

  // Ground-truth unit of each keyword, recovered from the keyword records.
  std::map<std::string, int> unit_of;
  for (const KeywordRecord& rec : corpus.keywords) {
    const int c = std::stoi(rec.doc_key.substr(1, 2));
    for (std::size_t t = 0; t < rec.keywords.size(); ++t) {
      unit_of[rec.keywords[t]] = c * spec.m + static_cast<int>(t);
    }
  }
  std::size_t members_total = 0;
  for (const Atom& atom : vocab.atoms) {
    require(atom.members.size() == static_cast<std::size_t>(spec.languages),
            "atom " + std::to_string(atom.id) + " has " + std::to_string(atom.members.size()) +
                " members");
    const int unit = unit_of.at(atom.members.front());
    for (const std::string& member : atom.members) {
      require(unit_of.at(member) == unit, "atom mixes semantic units");
    }
    members_total += atom.members.size();
  }
  require(members_total == gks.size(), "atom members do not partition the keyword set");
  return "C = " + std::to_string(vocab.atom_count()) + ", exact concept-slot partition";
}

// ---------------------------------------------------------------------------
// Criterion 5: threshold guarantee replayed on every built fixture.
// ---------------------------------------------------------------------------
std::string threshold_guarantee() {
  std::size_t members_checked = 0;
  for (const std::uint64_t seed : {1, 2, 3, 4, 5, 404}) {
    const SynthSpec spec{.concepts = 3, .languages = 4, .docs_per_cell = 2, .m = 3,
                         .dim = 16, .seed = seed};
    const SynthCorpus corpus = generate_synthetic_corpus(spec);
    const GlobalKeywordSet gks = build_global_keyword_set(corpus.keywords);
    for (const double theta : {0.5, 0.8, 0.95}) {
      const AtomVocabulary vocab = cluster_keywords(gks, corpus.embeddings, theta);
      for (const Atom& atom : vocab.atoms) {
        for (std::size_t i = 1; i < atom.members.size(); ++i) {
          const double sim = cosine(corpus.embeddings.at(atom.members[i]),
                                    corpus.embeddings.at(atom.center_keyword));
          require(sim >= theta - 1e-9, "member below threshold: " + std::to_string(sim) +
                                           " < " + std::to_string(theta));
          ++members_checked;
        }
      }
    }
  }
  return std::to_string(members_checked) + " non-center members within 1e-9 of the bound";
}

// ---------------------------------------------------------------------------
// Criterion 6: clustering lifts cross-lingual Recall@10 on 5 fixed seeds.
// ---------------------------------------------------------------------------
std::string compression_lift() {
  std::ostringstream detail;
  for (const std::uint64_t seed : {101, 102, 103, 104, 105}) {
    const SynthSpec spec{.concepts = 3, .languages = 4, .docs_per_cell = 5, .m = 3, .dim = 16,
                         .intra_min_cosine = 0.95, .inter_max_cosine = 0.30, .seed = seed};
    const SynthCorpus corpus = generate_synthetic_corpus(spec);

    double recalls[2] = {0.0, 0.0};
    int slot = 0;
    for (const double theta : {0.8, 1.01}) {  // clustered, then singleton atoms
      const RetrievalIndex index = build_index(corpus, theta, spec.m);
      StatisticalScorer scorer =
          StatisticalScorer::train(corpus.training_pairs, index.docids(), index.vocab(), 1.0);
      const EvalReport report = evaluate(index, scorer, corpus.queries, 10);
      recalls[slot++] = report.avg.recall_at_10;
    }
    require(recalls[0] > recalls[1],
            "no lift at seed " + std::to_string(seed) + ": clustered " +
                std::to_string(recalls[0]) + " vs singleton " + std::to_string(recalls[1]));
    detail << " " << seed << ":" << recalls[0] << ">" << recalls[1];
  }
  return "all 5 seeds show lift:" + detail.str();
}

// ---------------------------------------------------------------------------
// Criterion 7: scale invariance and normalization over 10,000 cases.
// ---------------------------------------------------------------------------
std::string scale_invariance() {
  auto rng = make_rng(0x5CA1E);
  const auto uniform01 = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  // 9,000 distribution-level cases.
  for (int trial = 0; trial < 9000; ++trial) {
    const std::size_t k = 1 + rng() % 20;
    std::vector<AtomId> candidates;
    std::vector<double> raw;
    for (std::size_t i = 0; i < k; ++i) {
      candidates.push_back(static_cast<AtomId>(i));
      raw.push_back(rng() % 4 == 0 ? static_cast<double>(rng() % 10)
                                   : uniform01() * 100.0);
    }
    const double constant = std::pow(10.0, uniform01() * 16.0 - 8.0);

    TableScorer base(0.0);
    TableScorer scaled(0.0);
    for (std::size_t i = 0; i < k; ++i) {
      base.set({}, candidates[i], raw[i]);
      scaled.set({}, candidates[i], raw[i] * constant);
    }
    const StepDistribution a = step_distribution(base, "q", {}, candidates);
    const StepDistribution b = step_distribution(scaled, "q", {}, candidates);

    double sum_a = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      require(std::abs(a.probabilities[i] - b.probabilities[i]) <= 1e-9,
              "probability shifted by more than 1e-9 under scaling");
      sum_a += a.probabilities[i];
    }
    require(std::abs(sum_a - 1.0) <= 1e-9, "probabilities do not sum to 1 within 1e-9");
  }

  // 1,000 decode-level cases; power-of-two constants must be bit-exact.
  for (int trial = 0; trial < 1000; ++trial) {
    const auto docids = test_util::random_docids(rng, 2 + rng() % 25, 3, 2 + rng() % 6);
    const PrefixTrie trie = build_trie(docids);
    test_util::HashScorer inner(rng());
    const bool power_of_two = trial % 2 == 0;
    const double constant =
        power_of_two ? std::ldexp(1.0, static_cast<int>(rng() % 17) - 8)
                     : std::pow(10.0, uniform01() * 6.0 - 3.0);
    test_util::ScaledScorer scaled(inner, constant);

    const int width = 1 + static_cast<int>(rng() % 10);
    const DecodeResult a = decode_beam(trie, inner, "q", width);
    const DecodeResult b = decode_beam(trie, scaled, "q", width);
    require(same_result(a, b, power_of_two),
            std::string("decode changed under a ") +
                (power_of_two ? "power-of-two" : "positive") + " scaling constant");

    const DecodeResult ga = decode_greedy(trie, inner, "q");
    const DecodeResult gb = decode_greedy(trie, scaled, "q");
    require(same_result(ga, gb, power_of_two), "greedy decode changed under scaling");
  }
  return "10000 cases within 1e-9; decode rankings unchanged";
}

// ---------------------------------------------------------------------------
// Criterion 8: greedy decoding costs exactly m scorer calls, |A_t| <= C.
// ---------------------------------------------------------------------------
std::string efficiency_bound() {
  auto rng = make_rng(0xEFF1C);
  std::size_t decodes = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const SynthSpec spec{.concepts = 2 + trial % 3, .languages = 2 + trial % 2,
                         .docs_per_cell = 2, .m = 3, .dim = 32,
                         .seed = 600 + static_cast<std::uint64_t>(trial)};
    const SynthCorpus corpus = generate_synthetic_corpus(spec);
    const RetrievalIndex index = build_index(corpus, 0.8, spec.m);
    const std::size_t c = index.vocab().atom_count();
    StatisticalScorer statistical =
        StatisticalScorer::train(corpus.training_pairs, index.docids(), index.vocab(), 1.0);
    UniformScorer uniform;
    test_util::HashScorer hash(rng());

    for (Scorer* scorer : std::initializer_list<Scorer*>{&statistical, &uniform, &hash}) {
      for (const QueryRecord& query : corpus.queries) {
        test_util::CountingScorer counted(*scorer);
        const DecodeResult result = decode_greedy(index.trie(), counted, query.text);
        require(counted.calls() == static_cast<std::size_t>(index.m()),
                "greedy used " + std::to_string(counted.calls()) + " scorer calls, expected m = " +
                    std::to_string(index.m()));
        require(result.scorer_calls == counted.calls(), "metadata disagrees with instrumentation");
        require(counted.max_candidates() <= c, "candidate set exceeded C");
        require(result.max_candidate_set <= c, "reported candidate set exceeded C");
        ++decodes;

        // Beam candidate sets obey the same bound.
        test_util::CountingScorer counted_beam(*scorer);
        decode_beam(index.trie(), counted_beam, query.text, 5);
        require(counted_beam.max_candidates() <= c, "beam candidate set exceeded C");
        ++decodes;
      }
    }
  }
  return std::to_string(decodes) + " instrumented decodes, m calls each, |A_t| <= C";
}

// ---------------------------------------------------------------------------
// Criterion 9: build -> serialize -> load -> decode is bit-identical.
// ---------------------------------------------------------------------------
std::string round_trip_fidelity() {
  const fs::path dir =
      fs::temp_directory_path() / ("mgr_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  int fixtures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const SynthSpec spec{.concepts = 1 + trial % 5, .languages = 1 + trial % 4,
                         .docs_per_cell = 1 + trial % 3, .m = 3,
                         .dim = 24, .seed = 7000 + static_cast<std::uint64_t>(trial)};
    const SynthCorpus corpus = generate_synthetic_corpus(spec);
    const RetrievalIndex built = build_index(corpus, 0.8, spec.m);
    const fs::path path = dir / ("index_" + std::to_string(trial) + ".json");
    save_index(built, path);
    const RetrievalIndex loaded = load_index(path);

    StatisticalScorer statistical =
        StatisticalScorer::train(corpus.training_pairs, built.docids(), built.vocab(), 1.0);
    UniformScorer uniform;
    for (Scorer* scorer : std::initializer_list<Scorer*>{&uniform, &statistical}) {
      for (const QueryRecord& query : corpus.queries) {
        const DecodeResult a = decode_beam(built.trie(), *scorer, query.text, 10);
        const DecodeResult b = decode_beam(loaded.trie(), *scorer, query.text, 10);
        require(same_result(a, b, /*bitwise_logprob=*/true),
                "decode differs after round-trip at fixture " + std::to_string(trial));
      }
    }

    // Save-load-save reproduces the file byte for byte.
    const fs::path again = dir / ("index_again_" + std::to_string(trial) + ".json");
    save_index(loaded, again);
    std::ifstream fa(path, std::ios::binary);
    std::ifstream fb(again, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    require(ca == cb, "re-serialized index differs at fixture " + std::to_string(trial));
    ++fixtures;
  }
  fs::remove_all(dir);
  return std::to_string(fixtures) + " fixtures bit-identical";
}

// ---------------------------------------------------------------------------
// Criterion 10: the external scorer protocol against the reference server.
// ---------------------------------------------------------------------------
std::string external_scorer_protocol() {
  const std::string stub = MGR_STUB_PATH;
  auto rng = make_rng(0x5E4E);

  auto external = ExternalScorer::connect("exec:" + stub + " --mode uniform");
  UniformScorer builtin;
  for (int trial = 0; trial < 20; ++trial) {
    const auto docids = test_util::random_docids(rng, 2 + rng() % 40, 3, 2 + rng() % 8);
    const PrefixTrie trie = build_trie(docids);
    const int width = 1 + static_cast<int>(rng() % 6);
    const DecodeResult a = decode_beam(trie, *external, "q" + std::to_string(trial), width);
    const DecodeResult b = decode_beam(trie, builtin, "q" + std::to_string(trial), width);
    require(same_result(a, b, /*bitwise_logprob=*/true),
            "external uniform decode differs at instance " + std::to_string(trial));
  }

  const auto expect_protocol_error = [&](const std::string& mode, const std::string& needle) {
    auto bad = ExternalScorer::connect("exec:" + stub + " --mode " + mode);
    try {
      bad->score("q", {}, std::vector<AtomId>{1, 2, 3});
    } catch (const ProtocolError& e) {
      require(std::string(e.what()).find(needle) != std::string::npos,
              mode + " error lacks detail \"" + needle + "\": " + e.what());
      return;
    }
    throw Failure{"mode " + mode + " did not raise a ProtocolError"};
  };
  expect_protocol_error("wrong-length", "expected 3");
  expect_protocol_error("negative", "negative");
  expect_protocol_error("non-finite", "");
  return "20 identical instances; malformed responses rejected";
}

struct Criterion {
  const char* name;
  std::function<std::string()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"constraint-soundness", constraint_soundness},
      {"decode-validity", decode_validity},
      {"oracle-equivalence", oracle_equivalence},
      {"clustering-correctness", clustering_correctness},
      {"threshold-guarantee", threshold_guarantee},
      {"compression-lift", compression_lift},
      {"scale-invariance", scale_invariance},
      {"efficiency-bound", efficiency_bound},
      {"round-trip-fidelity", round_trip_fidelity},
      {"external-scorer-protocol", external_scorer_protocol},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    try {
      const std::string detail = criterion.body();
      std::printf("PASS  %-26s %s\n", criterion.name, detail.c_str());
    } catch (const Failure& f) {
      ++failures;
      std::printf("FAIL  %-26s %s\n", criterion.name, f.details.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  %-26s unexpected error: %s\n", criterion.name, e.what());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
