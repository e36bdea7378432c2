#include "mgr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mgr/atomizer.hpp"
#include "mgr/corpus.hpp"
#include "mgr/error.hpp"

namespace mgr {

namespace {

constexpr const char* kLanguageTags[] = {"en", "de", "fr", "vi", "sv", "ar",
                                         "hi", "mk", "es", "it", "ja", "zh"};

std::string language_tag(int index) {
  if (index < static_cast<int>(std::size(kLanguageTags))) return kLanguageTags[index];
  std::ostringstream out;
  out << "l" << index;
  return out.str();
}

// Uniform double in [0, 1) from the engine's raw 64-bit output, so results do
// not depend on the standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  // Box-Muller; both uniforms drawn even though one output is discarded.
  double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Keyword surface for one (semantic group, language) pair: a doubled
// two-letter code ("ababab"), so distinct surfaces share no token and no
// codepoint trigram. Cross-lingual relatedness must come from the embedding
// geometry alone, not from accidental string overlap.
std::string surface_form(int surface_id) {
  if (surface_id < 26 * 26) {
    const char a = static_cast<char>('a' + surface_id / 26);
    const char b = static_cast<char>('a' + surface_id % 26);
    return std::string{a, b, a, b, a, b};
  }
  // Beyond 676 surfaces the trigram-disjointness is no longer needed; fall
  // back to an underscore-delimited code.
  return "kw_" + std::to_string(surface_id);
}

// Orthonormal rotation via modified Gram-Schmidt on seeded Gaussian vectors.
std::vector<std::vector<double>> random_rotation(int dim, std::mt19937_64& rng) {
  std::vector<std::vector<double>> basis;
  basis.reserve(dim);
  while (static_cast<int>(basis.size()) < dim) {
    std::vector<double> v(dim);
    for (double& x : v) x = gaussian(rng);
    for (const auto& b : basis) {
      double dot = 0.0;
      for (int i = 0; i < dim; ++i) dot += v[i] * b[i];
      for (int i = 0; i < dim; ++i) v[i] -= dot * b[i];
    }
    double norm = 0.0;
    for (const double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;  // degenerate draw, try again
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

struct Geometry {
  // embedding for (group, language): unit vector
  std::vector<std::vector<std::vector<double>>> vectors;  // [group][lang]
};

Geometry build_geometry(const SynthSpec& spec, std::uint64_t attempt_seed) {
  const int groups = spec.concepts * spec.m;
  std::mt19937_64 rng(attempt_seed);
  const auto rotation = random_rotation(spec.dim, rng);

  // Language variants fan out from the group axis toward one shared extra
  // axis by at most delta, which keeps intra-group pairs >= cos(delta) and
  // cross-group pairs <= sin(delta)^2.
  double delta = 0.0;
  if (spec.languages > 1) {
    const double intra_limit = std::acos(std::min(1.0, spec.intra_min_cosine));
    const double inter_limit = std::asin(std::sqrt(spec.inter_max_cosine));
    delta = std::min(intra_limit, inter_limit) * (1.0 - 1e-6);
  }

  Geometry geo;
  geo.vectors.resize(groups);
  for (int g = 0; g < groups; ++g) {
    geo.vectors[g].resize(spec.languages);
    for (int l = 0; l < spec.languages; ++l) {
      const double psi =
          spec.languages > 1 ? delta * static_cast<double>(l) / (spec.languages - 1) : 0.0;
      const double c = std::cos(psi);
      const double s = std::sin(psi);
      // c * axis_g + s * axis_shared, expressed in the rotated basis.
      std::vector<double> v(spec.dim, 0.0);
      for (int i = 0; i < spec.dim; ++i) {
        v[i] = c * rotation[g][i] + s * rotation[groups][i];
      }
      geo.vectors[g][l] = std::move(v);
    }
  }
  return geo;
}

void verify_geometry(const Geometry& geo, const SynthSpec& spec) {
  const int groups = static_cast<int>(geo.vectors.size());
  for (int g1 = 0; g1 < groups; ++g1) {
    for (int l1 = 0; l1 < spec.languages; ++l1) {
      for (int g2 = g1; g2 < groups; ++g2) {
        for (int l2 = (g2 == g1 ? l1 + 1 : 0); l2 < spec.languages; ++l2) {
          const double sim = cosine(geo.vectors[g1][l1], geo.vectors[g2][l2]);
          if (g1 == g2 && sim < spec.intra_min_cosine) {
            throw Error("synthetic geometry violates the intra-group bound: " +
                        std::to_string(sim) + " < " + std::to_string(spec.intra_min_cosine));
          }
          if (g1 != g2 && sim > spec.inter_max_cosine) {
            throw Error("synthetic geometry violates the inter-group bound: " +
                        std::to_string(sim) + " > " + std::to_string(spec.inter_max_cosine));
          }
        }
      }
    }
  }
}

void validate_spec(const SynthSpec& spec) {
  if (spec.concepts < 1 || spec.languages < 1 || spec.docs_per_cell < 1 || spec.m < 1 ||
      spec.dim < 1) {
    throw Error("synthetic spec counts must all be positive");
  }
  if (!(spec.intra_min_cosine > 0.0) || spec.intra_min_cosine > 1.0) {
    throw Error("intra_min_cosine must be in (0, 1]");
  }
  if (spec.inter_max_cosine < 0.0 || spec.inter_max_cosine >= 1.0) {
    throw Error("inter_max_cosine must be in [0, 1)");
  }
  if (spec.intra_min_cosine <= spec.inter_max_cosine) {
    throw Error("infeasible cosine bounds: intra_min_cosine (" +
                std::to_string(spec.intra_min_cosine) + ") must exceed inter_max_cosine (" +
                std::to_string(spec.inter_max_cosine) + ")");
  }
  const int groups = spec.concepts * spec.m;
  const int needed = spec.languages > 1 ? groups + 1 : groups;
  if (spec.dim < needed) {
    throw Error("infeasible geometry: dim " + std::to_string(spec.dim) + " < " +
                std::to_string(needed) + " required for " + std::to_string(groups) +
                " semantic groups");
  }
}

}  // namespace

SynthCorpus generate_synthetic_corpus(const SynthSpec& spec) {
  validate_spec(spec);

  // Deterministic construction; bounded re-seeded retries guard against a
  // pathological rotation draw.
  Geometry geo;
  bool ok = false;
  std::string last_error;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    geo = build_geometry(spec, spec.seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ull);
    try {
      verify_geometry(geo, spec);
      ok = true;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!ok) {
    throw Error("synthetic embedding construction failed after 1000 attempts: " + last_error);
  }

  SynthCorpus out;
  const auto unit_id = [&](int concept_idx, int slot) { return concept_idx * spec.m + slot; };
  const auto surface = [&](int group, int lang) {
    return surface_form(group * spec.languages + lang);
  };

  for (int g = 0; g < spec.concepts * spec.m; ++g) {
    for (int l = 0; l < spec.languages; ++l) {
      out.embeddings.emplace(surface(g, l), geo.vectors[g][l]);
    }
  }

  const auto pad2 = [](int v) {
    return (v < 10 ? "0" : "") + std::to_string(v);
  };

  // doc keys per (concept, language), for relevance assembly below.
  std::vector<std::vector<std::vector<std::string>>> cell_docs(
      spec.concepts, std::vector<std::vector<std::string>>(spec.languages));

  for (int c = 0; c < spec.concepts; ++c) {
    for (int l = 0; l < spec.languages; ++l) {
      const std::string lang = language_tag(l);
      std::vector<std::string> cell_keywords;
      for (int s = 0; s < spec.m; ++s) {
        cell_keywords.push_back(surface(unit_id(c, s), l));
      }
      std::string keyword_text;
      for (const std::string& kw : cell_keywords) {
        if (!keyword_text.empty()) keyword_text += ' ';
        keyword_text += kw;
      }
      // One filler token per language; its trigrams collide with nothing.
      const std::string query_text = keyword_text + " q" + lang;

      for (int d = 0; d < spec.docs_per_cell; ++d) {
        Document doc;
        doc.doc_key = "c" + pad2(c) + "-" + lang + "-" + pad2(d);
        doc.lang = lang;
        doc.text = keyword_text + " body" + std::to_string(d) + " " + lang;
        cell_docs[c][l].push_back(doc.doc_key);

        KeywordRecord rec;
        rec.doc_key = doc.doc_key;
        rec.keywords = cell_keywords;
        out.keywords.push_back(std::move(rec));

        out.training_pairs.push_back(TrainingPair{query_text, doc.doc_key});
        out.documents.push_back(std::move(doc));
      }

      QueryRecord query;
      query.query_key = "q-c" + pad2(c) + "-" + lang;
      query.lang = lang;
      query.text = query_text;
      out.queries.push_back(std::move(query));
    }
  }

  // Cross-lingual relevance: documents of the same concept in another
  // language. Single-language corpora degrade to same-language targets.
  for (QueryRecord& query : out.queries) {
    const std::size_t index = &query - out.queries.data();
    const int c = static_cast<int>(index) / spec.languages;
    const int l = static_cast<int>(index) % spec.languages;
    for (int dl = 0; dl < spec.languages; ++dl) {
      if (spec.languages > 1 && dl == l) continue;
      for (const std::string& key : cell_docs[c][dl]) {
        query.relevant_doc_keys.push_back(key);
      }
    }
  }
  return out;
}

void write_synthetic_corpus(const SynthCorpus& corpus, const SynthSpec& spec,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_corpus(dir / "corpus.jsonl", corpus.documents);
  save_keywords(dir / "keywords.jsonl", corpus.keywords);
  save_embeddings(dir / "embeddings.jsonl", corpus.embeddings);
  save_queries(dir / "queries.jsonl", corpus.queries);
  save_training_pairs(dir / "pairs.jsonl", corpus.training_pairs);

  nlohmann::ordered_json obj;
  obj["concepts"] = spec.concepts;
  obj["languages"] = spec.languages;
  obj["docs_per_cell"] = spec.docs_per_cell;
  obj["m"] = spec.m;
  obj["dim"] = spec.dim;
  obj["intra_min_cosine"] = spec.intra_min_cosine;
  obj["inter_max_cosine"] = spec.inter_max_cosine;
  obj["seed"] = spec.seed;
  atomic_write_file(dir / "synth_spec.json", obj.dump(2) + "\n");
}

}  // namespace mgr
