#include "mgr/atomizer.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mgr/error.hpp"
#include "mgr/text.hpp"

namespace mgr {

GlobalKeywordSet build_global_keyword_set(std::span<const KeywordRecord> records) {
  if (records.empty()) {
    throw Error("cannot build a global keyword set from zero records");
  }
  GlobalKeywordSet gks;
  for (const KeywordRecord& rec : records) {
    for (const std::string& kw : rec.keywords) {
      ++gks.frequency[kw];
    }
  }
  gks.keywords.reserve(gks.frequency.size());
  for (const auto& [kw, _] : gks.frequency) {
    gks.keywords.push_back(kw);
  }
  // Byte-wise comparison of UTF-8 equals codepoint order.
  std::sort(gks.keywords.begin(), gks.keywords.end(),
            [&](const std::string& a, const std::string& b) {
              const std::size_t fa = gks.frequency.at(a);
              const std::size_t fb = gks.frequency.at(b);
              if (fa != fb) return fa > fb;
              return a < b;
            });
  return gks;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu <= 0.0 || nv <= 0.0) {
    throw Error("cosine: zero vector");
  }
  const double value = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(value, -1.0, 1.0);
}

AtomVocabulary cluster_keywords(const GlobalKeywordSet& gks, const EmbeddingMap& embeddings,
                                double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw Error("invalid theta: must be finite and >= 0");
  }
  AtomVocabulary vocab;
  vocab.theta = theta;

  std::vector<const std::vector<double>*> centers;  // parallel to vocab.atoms
  for (const std::string& kw : gks.keywords) {
    const auto it = embeddings.find(kw);
    if (it == embeddings.end()) {
      throw Error("missing embedding for keyword \"" + kw + "\"");
    }
    const std::vector<double>& vec = it->second;

    // Nearest existing center; ties keep the lowest atom id.
    double best = -2.0;
    std::size_t best_atom = 0;
    for (std::size_t a = 0; a < centers.size(); ++a) {
      const double sim = cosine(vec, *centers[a]);
      if (sim > best) {
        best = sim;
        best_atom = a;
      }
    }
    if (!centers.empty() && best >= theta) {
      vocab.atoms[best_atom].members.push_back(kw);
      vocab.keyword_to_atom.emplace(kw, static_cast<AtomId>(best_atom));
    } else {
      Atom atom;
      atom.id = static_cast<AtomId>(vocab.atoms.size());
      atom.center_keyword = kw;
      atom.members.push_back(kw);
      vocab.keyword_to_atom.emplace(kw, atom.id);
      vocab.atoms.push_back(std::move(atom));
      centers.push_back(&vec);
    }
  }
  return vocab;
}

DocIdAssignment assign_docids(std::span<const KeywordRecord> records, const AtomVocabulary& vocab,
                              CollisionMode mode) {
  DocIdAssignment result;
  std::map<AtomSequence, std::vector<std::string>> by_sequence;
  for (const KeywordRecord& rec : records) {
    AtomDocId docid;
    docid.doc_key = rec.doc_key;
    docid.atoms.reserve(rec.keywords.size());
    for (const std::string& kw : rec.keywords) {
      const auto it = vocab.keyword_to_atom.find(kw);
      if (it == vocab.keyword_to_atom.end()) {
        throw Error("keyword \"" + kw + "\" of document \"" + rec.doc_key +
                    "\" is not in the atom vocabulary");
      }
      docid.atoms.push_back(it->second);
    }
    by_sequence[docid.atoms].push_back(rec.doc_key);
    result.docids.emplace(rec.doc_key, std::move(docid));
  }

  for (auto& [seq, keys] : by_sequence) {
    if (keys.size() < 2) continue;
    std::sort(keys.begin(), keys.end());
    result.collisions.groups.push_back(CollisionGroup{seq, keys});
  }

  if (mode == CollisionMode::kStrict && !result.collisions.empty()) {
    std::string msg = "DocID collision(s) in strict mode:";
    for (const CollisionGroup& g : result.collisions.groups) {
      msg += " {";
      for (std::size_t i = 0; i < g.doc_keys.size(); ++i) {
        if (i) msg += ", ";
        msg += '"' + g.doc_keys[i] + '"';
      }
      msg += "}";
    }
    throw Error(msg);
  }
  return result;
}

SpaceReport docid_space_report(const std::map<std::string, AtomDocId>& docids,
                               const AtomVocabulary& vocab, const GlobalKeywordSet& gks,
                               const TokenCounter& counter) {
  if (docids.empty()) {
    throw Error("space report requires a non-empty DocID map");
  }
  const TokenCounter count_tokens =
      counter ? counter : TokenCounter([](std::string_view s) { return whitespace_token_count(s); });

  SpaceReport report;
  report.document_count = docids.size();
  report.keyword_count = gks.size();
  report.atom_count = vocab.atom_count();
  report.m = docids.begin()->second.atoms.size();
  for (const auto& [key, docid] : docids) {
    if (docid.atoms.size() != report.m) {
      throw Error("inconsistent DocID length for \"" + key + "\"");
    }
  }
  report.vocabulary_compression_ratio =
      static_cast<double>(report.atom_count) / static_cast<double>(report.keyword_count);

  std::map<AtomSequence, std::size_t> distinct;
  for (const auto& [_, docid] : docids) ++distinct[docid.atoms];
  report.distinct_docid_count = distinct.size();

  const double dm = static_cast<double>(report.m);
  report.log10_naive_space = dm * std::log10(static_cast<double>(report.document_count));
  report.log10_compressed_space = dm * std::log10(static_cast<double>(report.atom_count));

  // Baseline identifier length: every keyword occurrence spelled out.
  // frequency already counts occurrences across all documents.
  std::size_t baseline = 0;
  for (const std::string& kw : gks.keywords) {
    baseline += gks.frequency.at(kw) * count_tokens(kw);
  }
  report.identifier_tokens_baseline = baseline;
  report.identifier_tokens_compressed = report.document_count * report.m;
  report.identifier_token_reduction =
      baseline == 0 ? 0.0
                    : 1.0 - static_cast<double>(report.identifier_tokens_compressed) /
                                static_cast<double>(baseline);
  return report;
}

std::string space_report_to_json(const SpaceReport& r) {
  nlohmann::ordered_json obj;
  obj["document_count"] = r.document_count;
  obj["keyword_count"] = r.keyword_count;
  obj["atom_count"] = r.atom_count;
  obj["m"] = r.m;
  obj["vocabulary_compression_ratio"] = r.vocabulary_compression_ratio;
  obj["distinct_docid_count"] = r.distinct_docid_count;
  obj["log10_naive_space"] = r.log10_naive_space;
  obj["log10_compressed_space"] = r.log10_compressed_space;
  obj["identifier_tokens_baseline"] = r.identifier_tokens_baseline;
  obj["identifier_tokens_compressed"] = r.identifier_tokens_compressed;
  obj["identifier_token_reduction"] = r.identifier_token_reduction;
  return obj.dump(2);
}

}  // namespace mgr
