#include "mgr/statistical_scorer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mgr/corpus.hpp"
#include "mgr/error.hpp"
#include "mgr/text.hpp"

namespace mgr {

namespace {
constexpr int kScorerFormatVersion = 1;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

StatisticalScorer StatisticalScorer::train(std::span<const TrainingPair> pairs,
                                           const std::map<std::string, AtomDocId>& docids,
                                           const AtomVocabulary& vocab, double alpha) {
  if (pairs.empty()) {
    throw Error("cannot train a scorer on zero training pairs");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error("alpha must be a positive finite number");
  }
  if (docids.empty()) {
    throw Error("cannot train a scorer on an empty index");
  }
  (void)vocab;  // membership of targets' atoms is implied by assign_docids

  const std::size_t m = docids.begin()->second.atoms.size();

  StatisticalScorer scorer;
  scorer.alpha_ = alpha;
  scorer.document_count_ = docids.size();
  scorer.per_position_.resize(m);

  for (const auto& [_, docid] : docids) {
    for (std::size_t t = 0; t < m; ++t) {
      ++scorer.per_position_[t].prior[docid.atoms[t]];
    }
  }

  std::unordered_set<std::string> term_vocab;
  for (const TrainingPair& pair : pairs) {
    const auto it = docids.find(pair.target_doc_key);
    if (it == docids.end()) {
      throw Error("training pair targets unknown document \"" + pair.target_doc_key + "\"");
    }
    const AtomSequence& target = it->second.atoms;
    const std::vector<std::string> terms = extract_terms(pair.query_text);
    for (const std::string& term : terms) term_vocab.insert(term);
    for (std::size_t t = 0; t < m; ++t) {
      PositionCounts& pos = scorer.per_position_[t];
      ++pos.pair_count[target[t]];
      for (const std::string& term : terms) {
        ++pos.term_atom[term][target[t]];
      }
    }
  }
  scorer.distinct_terms_ = term_vocab.size();
  return scorer;
}

std::vector<double> StatisticalScorer::score(std::string_view query,
                                             std::span<const AtomId> prefix,
                                             std::span<const AtomId> candidates) {
  const std::size_t t = prefix.size();
  if (t >= per_position_.size()) {
    throw Error("prefix length " + std::to_string(t) + " exceeds trained positions (" +
                std::to_string(per_position_.size()) + ")");
  }
  const PositionCounts& pos = per_position_[t];
  const std::vector<std::string> terms = extract_terms(query);
  const double alpha_v = alpha_ * static_cast<double>(distinct_terms_);
  const double log_n = std::log(static_cast<double>(document_count_));

  std::vector<double> log_scores(candidates.size(), kNegInf);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const AtomId atom = candidates[i];
    const auto prior_it = pos.prior.find(atom);
    if (prior_it == pos.prior.end()) continue;  // never at this position: score 0
    double ls = std::log(static_cast<double>(prior_it->second)) - log_n;

    // With no trained terms the query contributes nothing; prior decides.
    if (distinct_terms_ > 0) {
      const auto pc_it = pos.pair_count.find(atom);
      const double atom_pairs = pc_it == pos.pair_count.end()
                                    ? 0.0
                                    : static_cast<double>(pc_it->second);
      const double log_denom = std::log(atom_pairs + alpha_v);
      for (const std::string& term : terms) {
        std::uint64_t c = 0;
        if (const auto term_it = pos.term_atom.find(term); term_it != pos.term_atom.end()) {
          if (const auto atom_it = term_it->second.find(atom); atom_it != term_it->second.end()) {
            c = atom_it->second;
          }
        }
        ls += std::log(static_cast<double>(c) + alpha_) - log_denom;
      }
    }
    log_scores[i] = ls;
  }

  double max_ls = kNegInf;
  for (const double ls : log_scores) max_ls = std::max(max_ls, ls);

  std::vector<double> scores(candidates.size(), 0.0);
  if (max_ls == kNegInf) return scores;  // all zero, caller degrades to uniform
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (log_scores[i] != kNegInf) scores[i] = std::exp(log_scores[i] - max_ls);
  }
  return scores;
}

void StatisticalScorer::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json obj;
  obj["format_version"] = kScorerFormatVersion;
  obj["alpha"] = alpha_;
  obj["m"] = per_position_.size();
  obj["document_count"] = document_count_;
  obj["distinct_terms"] = distinct_terms_;

  nlohmann::ordered_json positions = nlohmann::json::array();
  for (const PositionCounts& pos : per_position_) {
    nlohmann::ordered_json p;
    nlohmann::json prior = nlohmann::json::object();
    for (const auto& [atom, count] : pos.prior) prior[std::to_string(atom)] = count;
    nlohmann::json pair_count = nlohmann::json::object();
    for (const auto& [atom, count] : pos.pair_count) pair_count[std::to_string(atom)] = count;
    nlohmann::json term_atom = nlohmann::json::object();
    for (const auto& [term, atoms] : pos.term_atom) {
      nlohmann::json per_term = nlohmann::json::object();
      for (const auto& [atom, count] : atoms) per_term[std::to_string(atom)] = count;
      term_atom[term] = std::move(per_term);
    }
    p["prior"] = std::move(prior);
    p["pair_count"] = std::move(pair_count);
    p["term_atom"] = std::move(term_atom);
    positions.push_back(std::move(p));
  }
  obj["positions"] = std::move(positions);
  atomic_write_file(path, obj.dump(2) + "\n");
}

StatisticalScorer StatisticalScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open scorer file: " + path.string());
  }
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": malformed scorer file: " + e.what());
  }
  if (!obj.is_object() || !obj.contains("format_version")) {
    throw Error(path.string() + ": not a scorer file");
  }
  if (obj["format_version"].get<int>() != kScorerFormatVersion) {
    throw Error(path.string() + ": unsupported scorer format version " +
                obj["format_version"].dump() + ", expected " +
                std::to_string(kScorerFormatVersion));
  }

  StatisticalScorer scorer;
  try {
  scorer.alpha_ = obj.at("alpha").get<double>();
  scorer.document_count_ = obj.at("document_count").get<std::uint64_t>();
  scorer.distinct_terms_ = obj.at("distinct_terms").get<std::uint64_t>();
  for (const auto& p : obj.at("positions")) {
    PositionCounts pos;
    for (const auto& [atom, count] : p.at("prior").items()) {
      pos.prior[static_cast<AtomId>(std::stoul(atom))] = count.get<std::uint64_t>();
    }
    for (const auto& [atom, count] : p.at("pair_count").items()) {
      pos.pair_count[static_cast<AtomId>(std::stoul(atom))] = count.get<std::uint64_t>();
    }
    for (const auto& [term, atoms] : p.at("term_atom").items()) {
      for (const auto& [atom, count] : atoms.items()) {
        pos.term_atom[term][static_cast<AtomId>(std::stoul(atom))] = count.get<std::uint64_t>();
      }
    }
    scorer.per_position_.push_back(std::move(pos));
  }
  if (scorer.per_position_.size() != obj.at("m").get<std::size_t>()) {
    throw Error(path.string() + ": scorer position count does not match header");
  }
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": malformed scorer file: " + e.what());
  }
  return scorer;
}

}  // namespace mgr
