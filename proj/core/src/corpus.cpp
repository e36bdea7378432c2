#include "mgr/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mgr/error.hpp"
#include "mgr/text.hpp"

namespace mgr {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Calls `fn(line_number, parsed_object)` for every non-empty line.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open file: " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_ascii_whitespace(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(path.string() + ": malformed line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(path.string() + ": malformed line " + std::to_string(line_no) +
                  ": expected an object");
    }
    fn(line_no, obj);
  }
}

std::string require_string(const json& obj, const char* field, const std::filesystem::path& path,
                           std::size_t line_no) {
  const auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw Error(path.string() + ": line " + std::to_string(line_no) + ": missing string field '" +
                field + "'");
  }
  return it->get<std::string>();
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out += '\n';
  }
  atomic_write_file(path, out);
}

}  // namespace

void atomic_write_file(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write file: " + tmp.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw Error("short write: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;  // doc_key -> first line
  for_each_json_line(path, [&](std::size_t line_no, const json& obj) {
    Document doc;
    doc.doc_key = require_string(obj, "id", path, line_no);
    doc.lang = require_string(obj, "lang", path, line_no);
    doc.text = require_string(obj, "text", path, line_no);
    if (const auto it = obj.find("title"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw Error(path.string() + ": line " + std::to_string(line_no) + ": 'title' must be a string");
      }
      doc.title = it->get<std::string>();
    }
    if (doc.doc_key.empty()) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": empty document id");
    }
    if (doc.lang.empty()) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": empty lang");
    }
    if (const auto [it, inserted] = seen.emplace(doc.doc_key, line_no); !inserted) {
      throw Error(path.string() + ": duplicate doc_key \"" + doc.doc_key + "\" on line " +
                  std::to_string(line_no) + " (first seen on line " + std::to_string(it->second) +
                  ")");
    }
    docs.push_back(std::move(doc));
  });
  if (docs.empty()) {
    throw Error(path.string() + ": empty corpus");
  }
  return docs;
}

std::vector<KeywordRecord> load_keywords(const std::filesystem::path& path,
                                         std::span<const Document> corpus, int m) {
  std::vector<std::string> keys;
  keys.reserve(corpus.size());
  for (const Document& d : corpus) keys.push_back(d.doc_key);
  return load_keywords(path, keys, m);
}

std::vector<KeywordRecord> load_keywords(const std::filesystem::path& path,
                                         std::span<const std::string> doc_keys, int m) {
  if (m < 1) {
    throw Error("keyword count m must be positive");
  }
  std::unordered_set<std::string> corpus_keys;
  corpus_keys.reserve(doc_keys.size());
  for (const std::string& key : doc_keys) corpus_keys.insert(key);

  std::vector<KeywordRecord> records;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](std::size_t line_no, const json& obj) {
    KeywordRecord rec;
    rec.doc_key = require_string(obj, "id", path, line_no);
    const auto it = obj.find("keywords");
    if (it == obj.end() || !it->is_array()) {
      throw Error(path.string() + ": line " + std::to_string(line_no) +
                  ": missing array field 'keywords'");
    }
    if (!corpus_keys.count(rec.doc_key)) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": unknown document \"" +
                  rec.doc_key + "\"");
    }
    if (!seen.insert(rec.doc_key).second) {
      throw Error(path.string() + ": line " + std::to_string(line_no) +
                  ": duplicate keyword record for \"" + rec.doc_key + "\"");
    }
    if (static_cast<int>(it->size()) != m) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": document \"" +
                  rec.doc_key + "\" has " + std::to_string(it->size()) + " keywords, expected " +
                  std::to_string(m));
    }
    for (const auto& kw : *it) {
      if (!kw.is_string()) {
        throw Error(path.string() + ": line " + std::to_string(line_no) +
                    ": keywords must be strings");
      }
      std::string canonical = canonicalize_keyword(kw.get<std::string>());
      if (canonical.empty()) {
        throw Error(path.string() + ": line " + std::to_string(line_no) + ": document \"" +
                    rec.doc_key + "\" has an empty keyword after trimming");
      }
      rec.keywords.push_back(std::move(canonical));
    }
    records.push_back(std::move(rec));
  });

  if (records.size() != doc_keys.size()) {
    std::string missing;
    std::size_t shown = 0;
    for (const std::string& key : doc_keys) {
      if (!seen.count(key)) {
        if (shown++) missing += ", ";
        if (shown > 5) {
          missing += "...";
          break;
        }
        missing += '"' + key + '"';
      }
    }
    throw Error(path.string() + ": keyword coverage incomplete, missing doc_key(s): " + missing);
  }
  return records;
}

namespace {

// SAX handler for one embedding line. Number overflow (e.g. 1e999) never
// reaches the DOM, so component-precise diagnostics need the event stream.
struct EmbeddingLineSax {
  std::string keyword;
  bool have_keyword = false;
  std::vector<double> vec;
  bool saw_vector = false;
  std::string error;
  std::size_t error_index = SIZE_MAX;

  // parser state
  std::string current_key;
  int depth = 0;
  bool in_vector = false;

  bool fail(const std::string& message) {
    if (error.empty()) error = message;
    return false;
  }
  bool accept_number(double value) {
    if (in_vector) {
      vec.push_back(value);
      return true;
    }
    return true;  // numbers outside "vector" are ignored
  }

  bool null() { return in_vector ? fail("vector component is not a number") : true; }
  bool boolean(bool) { return in_vector ? fail("vector component is not a number") : true; }
  bool number_integer(std::int64_t v) { return accept_number(static_cast<double>(v)); }
  bool number_unsigned(std::uint64_t v) { return accept_number(static_cast<double>(v)); }
  bool number_float(double v, const std::string&) { return accept_number(v); }
  bool string(std::string& value) {
    if (in_vector) return fail("vector component is not a number");
    if (depth == 1 && current_key == "keyword") {
      keyword = value;
      have_keyword = true;
    }
    return true;
  }
  bool binary(nlohmann::json::binary_t&) { return fail("unexpected binary value"); }
  bool start_object(std::size_t) {
    ++depth;
    return depth <= 1 || fail("nested objects are not part of the embedding format");
  }
  bool key(std::string& value) {
    current_key = value;
    return true;
  }
  bool end_object() {
    --depth;
    return true;
  }
  bool start_array(std::size_t) {
    if (depth == 1 && current_key == "vector" && !in_vector) {
      in_vector = true;
      saw_vector = true;
      return true;
    }
    return fail("unexpected array");
  }
  bool end_array() {
    in_vector = false;
    return true;
  }
  bool parse_error(std::size_t, const std::string& last_token,
                   const nlohmann::json::exception& e) {
    if (in_vector) {
      error_index = vec.size();
      return fail("non-finite or unparseable component '" + last_token + "'");
    }
    return fail(e.what());
  }
};

}  // namespace

EmbeddingMap load_embeddings(const std::filesystem::path& path,
                             const std::set<std::string>& required_keywords,
                             EmbeddingLoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open file: " + path.string());
  }
  EmbeddingMap embeddings;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_ascii_whitespace(line).empty()) continue;

    EmbeddingLineSax sax;
    nlohmann::json::sax_parse(line, &sax);
    const std::string where =
        sax.have_keyword ? "keyword \"" + canonicalize_keyword(sax.keyword) + "\""
                         : "line " + std::to_string(line_no);
    if (!sax.error.empty()) {
      if (sax.error_index != SIZE_MAX) {
        throw Error(path.string() + ": " + where + ": " + sax.error + " at index " +
                    std::to_string(sax.error_index));
      }
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": " + sax.error);
    }
    if (!sax.have_keyword) {
      throw Error(path.string() + ": line " + std::to_string(line_no) +
                  ": missing string field 'keyword'");
    }
    if (!sax.saw_vector || sax.vec.empty()) {
      throw Error(path.string() + ": line " + std::to_string(line_no) +
                  ": missing non-empty array field 'vector'");
    }
    std::string keyword = canonicalize_keyword(sax.keyword);
    std::vector<double> vec = std::move(sax.vec);
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (!std::isfinite(vec[i])) {
        throw Error(path.string() + ": keyword \"" + keyword +
                    "\": non-finite component at index " + std::to_string(i));
      }
    }
    if (dim == 0) {
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": keyword \"" + keyword +
                  "\" has dimension " + std::to_string(vec.size()) + ", expected " +
                  std::to_string(dim));
    }
    double norm_sq = 0.0;
    for (const double x : vec) norm_sq += x * x;
    if (norm_sq <= 0.0) {
      throw Error(path.string() + ": keyword \"" + keyword + "\": zero vector");
    }
    if (!embeddings.emplace(std::move(keyword), std::move(vec)).second) {
      throw Error(path.string() + ": line " + std::to_string(line_no) +
                  ": duplicate embedding for a keyword");
    }
  }

  std::vector<std::string> missing;
  for (const std::string& kw : required_keywords) {
    if (!embeddings.count(kw)) missing.push_back(kw);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) {
      if (i) list += ", ";
      list += '"' + missing[i] + '"';
    }
    if (missing.size() > 10) list += ", ...";
    throw Error(path.string() + ": missing embeddings for " + std::to_string(missing.size()) +
                " required keyword(s): " + list);
  }

  if (report != nullptr) {
    report->dimension = dim;
    report->loaded = embeddings.size();
    report->extra_keywords.clear();
    for (const auto& [kw, _] : embeddings) {
      if (!required_keywords.count(kw)) report->extra_keywords.push_back(kw);
    }
  }
  return embeddings;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path) {
  std::vector<QueryRecord> queries;
  std::unordered_set<std::string> seen;
  for_each_json_line(path, [&](std::size_t line_no, const json& obj) {
    QueryRecord q;
    q.query_key = require_string(obj, "id", path, line_no);
    q.lang = require_string(obj, "lang", path, line_no);
    q.text = require_string(obj, "text", path, line_no);
    if (const auto it = obj.find("relevant"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) {
        throw Error(path.string() + ": line " + std::to_string(line_no) +
                    ": 'relevant' must be an array");
      }
      for (const auto& r : *it) {
        if (!r.is_string()) {
          throw Error(path.string() + ": line " + std::to_string(line_no) +
                      ": 'relevant' entries must be strings");
        }
        q.relevant_doc_keys.push_back(r.get<std::string>());
      }
    }
    if (!seen.insert(q.query_key).second) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": duplicate query_key \"" +
                  q.query_key + "\"");
    }
    queries.push_back(std::move(q));
  });
  return queries;
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path) {
  std::vector<TrainingPair> pairs;
  for_each_json_line(path, [&](std::size_t line_no, const json& obj) {
    TrainingPair p;
    p.query_text = require_string(obj, "query", path, line_no);
    p.target_doc_key = require_string(obj, "doc", path, line_no);
    if (p.target_doc_key.empty()) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": empty target doc");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::map<std::string, std::vector<std::string>> load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open file: " + path.string());
  }
  std::map<std::string, std::vector<std::string>> qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<std::string> cols = whitespace_tokens(line);
    if (cols.empty()) continue;
    if (cols.size() != 2) {
      throw Error(path.string() + ": line " + std::to_string(line_no) +
                  ": expected two whitespace-separated columns");
    }
    qrels[cols[0]].push_back(cols[1]);
  }
  return qrels;
}

void save_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
  std::vector<std::string> lines;
  lines.reserve(docs.size());
  for (const Document& d : docs) {
    ordered_json obj;
    obj["id"] = d.doc_key;
    obj["lang"] = d.lang;
    obj["text"] = d.text;
    if (d.title) obj["title"] = *d.title;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

void save_keywords(const std::filesystem::path& path, std::span<const KeywordRecord> records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const KeywordRecord& r : records) {
    ordered_json obj;
    obj["id"] = r.doc_key;
    obj["keywords"] = r.keywords;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMap& embeddings) {
  std::vector<std::string> lines;
  lines.reserve(embeddings.size());
  for (const auto& [keyword, vector] : embeddings) {
    ordered_json obj;
    obj["keyword"] = keyword;
    obj["vector"] = vector;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

void save_queries(const std::filesystem::path& path, std::span<const QueryRecord> queries) {
  std::vector<std::string> lines;
  lines.reserve(queries.size());
  for (const QueryRecord& q : queries) {
    ordered_json obj;
    obj["id"] = q.query_key;
    obj["lang"] = q.lang;
    obj["text"] = q.text;
    if (!q.relevant_doc_keys.empty()) obj["relevant"] = q.relevant_doc_keys;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

void save_training_pairs(const std::filesystem::path& path, std::span<const TrainingPair> pairs) {
  std::vector<std::string> lines;
  lines.reserve(pairs.size());
  for (const TrainingPair& p : pairs) {
    ordered_json obj;
    obj["query"] = p.query_text;
    obj["doc"] = p.target_doc_key;
    lines.push_back(obj.dump());
  }
  write_lines(path, lines);
}

}  // namespace mgr
