#include "mgr/index.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mgr/corpus.hpp"
#include "mgr/error.hpp"

namespace mgr {

RetrievalIndex::RetrievalIndex(int m, double theta, AtomVocabulary vocab,
                               std::map<std::string, AtomDocId> docids)
    : m_(m), theta_(theta), vocab_(std::move(vocab)), docids_(std::move(docids)),
      trie_(PrefixTrie::build(docids_)) {
  if (m_ < 1) {
    throw Error("index m must be positive");
  }
  for (const auto& [key, docid] : docids_) {
    if (docid.atoms.size() != static_cast<std::size_t>(m_)) {
      throw Error("DocID of \"" + key + "\" has length " + std::to_string(docid.atoms.size()) +
                  ", expected m = " + std::to_string(m_));
    }
    for (const AtomId atom : docid.atoms) {
      if (atom >= vocab_.atom_count()) {
        throw Error("DocID of \"" + key + "\" references atom " + std::to_string(atom) +
                    " beyond the vocabulary (C = " + std::to_string(vocab_.atom_count()) + ")");
      }
    }
  }
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
  nlohmann::ordered_json obj;
  obj["format_version"] = kIndexFormatVersion;
  obj["m"] = index.m();
  obj["theta"] = index.theta();
  obj["document_count"] = index.document_count();

  nlohmann::ordered_json atoms = nlohmann::json::array();
  for (const Atom& atom : index.vocab().atoms) {
    nlohmann::ordered_json entry;
    entry["atom_id"] = atom.id;
    entry["center_keyword"] = atom.center_keyword;
    entry["members"] = atom.members;
    atoms.push_back(std::move(entry));
  }
  obj["atoms"] = std::move(atoms);

  nlohmann::json docids = nlohmann::json::object();  // sorted by doc_key
  for (const auto& [key, docid] : index.docids()) {
    docids[key] = docid.atoms;
  }
  obj["docids"] = std::move(docids);

  atomic_write_file(path, obj.dump(2) + "\n");
}

RetrievalIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open index file: " + path.string());
  }
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": malformed index file: " + e.what());
  }
  if (!obj.is_object() || !obj.contains("format_version")) {
    throw Error(path.string() + ": not an index file");
  }
  const int version = obj["format_version"].get<int>();
  if (version != kIndexFormatVersion) {
    throw Error(path.string() + ": index format version " + std::to_string(version) +
                " does not match supported version " + std::to_string(kIndexFormatVersion));
  }

  try {
  AtomVocabulary vocab;
  vocab.theta = obj.at("theta").get<double>();
  for (const auto& entry : obj.at("atoms")) {
    Atom atom;
    atom.id = entry.at("atom_id").get<AtomId>();
    atom.center_keyword = entry.at("center_keyword").get<std::string>();
    for (const auto& member : entry.at("members")) {
      atom.members.push_back(member.get<std::string>());
    }
    if (atom.id != vocab.atoms.size()) {
      throw Error(path.string() + ": atom ids are not contiguous");
    }
    if (atom.members.empty()) {
      throw Error(path.string() + ": atom " + std::to_string(atom.id) + " has no members");
    }
    for (const std::string& member : atom.members) {
      if (!vocab.keyword_to_atom.emplace(member, atom.id).second) {
        throw Error(path.string() + ": keyword \"" + member + "\" appears in two atoms");
      }
    }
    vocab.atoms.push_back(std::move(atom));
  }

  std::map<std::string, AtomDocId> docids;
  for (const auto& [key, atoms] : obj.at("docids").items()) {
    AtomDocId docid;
    docid.doc_key = key;
    for (const auto& atom : atoms) {
      docid.atoms.push_back(atom.get<AtomId>());
    }
    docids.emplace(key, std::move(docid));
  }

  const int m = obj.at("m").get<int>();
  const std::size_t document_count = obj.at("document_count").get<std::size_t>();
  if (document_count != docids.size()) {
    throw Error(path.string() + ": document_count header does not match DocID map size");
  }
  return RetrievalIndex(m, vocab.theta, std::move(vocab), std::move(docids));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": malformed index file: " + e.what());
  }
}

}  // namespace mgr
