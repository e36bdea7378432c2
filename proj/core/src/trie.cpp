#include "mgr/trie.hpp"

#include <sstream>

#include "mgr/error.hpp"

namespace mgr {

namespace {

std::string prefix_to_string(std::span<const AtomId> prefix) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) out << ", ";
    out << prefix[i];
  }
  out << ']';
  return out.str();
}

}  // namespace

PrefixTrie PrefixTrie::build(const std::map<std::string, AtomDocId>& docids) {
  if (docids.empty()) {
    throw Error("cannot build a trie from zero DocIDs");
  }
  PrefixTrie trie;
  trie.root_ = std::make_unique<Node>();
  trie.depth_ = docids.begin()->second.atoms.size();
  if (trie.depth_ == 0) {
    throw Error("cannot build a trie from empty DocID sequences");
  }

  // std::map iterates doc_keys ascending, so per-node doc lists stay sorted.
  for (const auto& [doc_key, docid] : docids) {
    if (docid.atoms.size() != trie.depth_) {
      throw Error("DocID length mismatch for \"" + doc_key + "\": " +
                  std::to_string(docid.atoms.size()) + " vs " + std::to_string(trie.depth_));
    }
    const auto doc_index = static_cast<std::uint32_t>(trie.doc_keys_.size());
    trie.doc_keys_.push_back(doc_key);

    Node* node = trie.root_.get();
    node->docs.push_back(doc_index);
    for (const AtomId atom : docid.atoms) {
      auto& child = node->children[atom];
      if (!child) child = std::make_unique<Node>();
      node = child.get();
      node->docs.push_back(doc_index);
    }
  }

  // Distinct DocIDs == number of depth-m nodes.
  std::size_t distinct = 0;
  std::vector<std::pair<const Node*, std::size_t>> stack{{trie.root_.get(), 0}};
  while (!stack.empty()) {
    const auto [node, level] = stack.back();
    stack.pop_back();
    if (level == trie.depth_) {
      ++distinct;
      continue;
    }
    for (const auto& [_, child] : node->children) {
      stack.emplace_back(child.get(), level + 1);
    }
  }
  trie.distinct_docids_ = distinct;
  return trie;
}

const PrefixTrie::Node* PrefixTrie::find(std::span<const AtomId> prefix) const {
  const Node* node = root_.get();
  for (const AtomId atom : prefix) {
    const auto it = node->children.find(atom);
    if (it == node->children.end()) return nullptr;
    node = it->second.get();
  }
  return node;
}

bool PrefixTrie::contains_prefix(std::span<const AtomId> prefix) const {
  return prefix.size() <= depth_ && find(prefix) != nullptr;
}

std::vector<AtomId> PrefixTrie::candidate_atoms(std::span<const AtomId> prefix) const {
  if (prefix.size() >= depth_) {
    throw Error("prefix " + prefix_to_string(prefix) + " is already complete (length " +
                std::to_string(depth_) + ")");
  }
  const Node* node = find(prefix);
  if (node == nullptr) {
    throw Error("unreachable prefix " + prefix_to_string(prefix));
  }
  std::vector<AtomId> atoms;
  atoms.reserve(node->children.size());
  for (const auto& [atom, _] : node->children) atoms.push_back(atom);
  return atoms;
}

std::vector<std::string> PrefixTrie::docs_with_prefix(std::span<const AtomId> prefix) const {
  const Node* node = find(prefix);
  if (node == nullptr) {
    throw Error("unreachable prefix " + prefix_to_string(prefix));
  }
  std::vector<std::string> keys;
  keys.reserve(node->docs.size());
  for (const std::uint32_t idx : node->docs) keys.push_back(doc_keys_[idx]);
  return keys;
}

std::vector<AtomSequence> PrefixTrie::all_docids() const {
  std::vector<AtomSequence> out;
  AtomSequence current;
  // Recursive lexicographic DFS via explicit lambda.
  auto walk = [&](auto&& self, const Node* node, std::size_t level) -> void {
    if (level == depth_) {
      out.push_back(current);
      return;
    }
    for (const auto& [atom, child] : node->children) {
      current.push_back(atom);
      self(self, child.get(), level + 1);
      current.pop_back();
    }
  };
  walk(walk, root_.get(), 0);
  return out;
}

}  // namespace mgr
