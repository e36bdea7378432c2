#pragma once

#include <memory>
#include <string>

#include "mgr/scorer.hpp"

namespace mgr {

inline constexpr const char* kScorerProtocolVersion = "mgr-scorer/1";

struct ExternalScorerOptions {
  int timeout_ms = 30000;
};

/// Scorer backed by an external process or local stream socket speaking the
/// mgr-scorer/1 protocol: newline-delimited JSON, one response per request,
/// in order. The server announces {"protocol": "mgr-scorer/1"} once at
/// session start. Each connection carries one in-flight request at a time;
/// parallel decoding needs one connection per worker.
///
/// Endpoints:
///   exec:<command line>   spawn the command, speak over its stdin/stdout
///   unix:<path>           connect to a UNIX stream socket
class ExternalScorer final : public Scorer {
 public:
  static std::unique_ptr<ExternalScorer> connect(const std::string& endpoint,
                                                 ExternalScorerOptions options = {});

  ~ExternalScorer() override;
  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  std::vector<double> score(std::string_view query, std::span<const AtomId> prefix,
                            std::span<const AtomId> candidates) override;

 private:
  ExternalScorer() = default;

  std::unique_ptr<struct ScorerConnection> conn_;
};

}  // namespace mgr
