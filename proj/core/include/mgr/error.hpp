#pragma once

#include <stdexcept>
#include <string>

namespace mgr {

/// Base class for all engine errors. Messages carry the offending
/// key/line/value so callers can report without re-parsing inputs.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Violation of the scorer wire protocol (mgr-scorer/1).
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(what) {}
};

}  // namespace mgr
