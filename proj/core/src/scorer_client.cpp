#include "mgr/scorer_client.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgr/error.hpp"
#include "mgr/text.hpp"

namespace mgr {

namespace {

using json = nlohmann::json;

void ignore_sigpipe_once() {
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

struct ScorerConnection {
  int read_fd = -1;
  int write_fd = -1;
  pid_t child = -1;
  int timeout_ms = 30000;
  std::string endpoint;
  std::string buffer;
  std::uint64_t next_request_id = 1;

  ~ScorerConnection() {
    if (write_fd >= 0) ::close(write_fd);
    if (read_fd >= 0 && read_fd != write_fd) ::close(read_fd);
    read_fd = write_fd = -1;
    if (child > 0) {
      // Closing stdin asks the server to exit; give it a moment, then insist.
      const int64_t deadline = now_ms() + 2000;
      int status = 0;
      while (::waitpid(child, &status, WNOHANG) == 0) {
        if (now_ms() > deadline) {
          ::kill(child, SIGKILL);
          ::waitpid(child, &status, 0);
          break;
        }
        ::usleep(10000);
      }
    }
  }

  void write_line(const std::string& line) {
    std::string framed = line;
    framed += '\n';
    std::size_t off = 0;
    while (off < framed.size()) {
      const ssize_t n = ::write(write_fd, framed.data() + off, framed.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error("scorer connection to " + endpoint + " failed while writing: " +
                    std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const int64_t deadline = now_ms() + timeout_ms;
    while (true) {
      const std::size_t pos = buffer.find('\n');
      if (pos != std::string::npos) {
        std::string line = buffer.substr(0, pos);
        buffer.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const int64_t remaining = deadline - now_ms();
      if (remaining <= 0) {
        throw Error("scorer at " + endpoint + " timed out after " + std::to_string(timeout_ms) +
                    " ms");
      }
      struct pollfd pfd {};
      pfd.fd = read_fd;
      pfd.events = POLLIN;
      const int rc = ::poll(&pfd, 1, static_cast<int>(remaining));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw Error("scorer connection to " + endpoint + " failed while polling: " +
                    std::strerror(errno));
      }
      if (rc == 0) {
        throw Error("scorer at " + endpoint + " timed out after " + std::to_string(timeout_ms) +
                    " ms");
      }
      char chunk[4096];
      const ssize_t n = ::read(read_fd, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error("scorer connection to " + endpoint + " failed while reading: " +
                    std::strerror(errno));
      }
      if (n == 0) {
        throw Error("scorer at " + endpoint + " closed the connection");
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

namespace {

std::unique_ptr<ScorerConnection> connect_exec(const std::string& command,
                                                         const std::string& endpoint) {
  const std::vector<std::string> args = whitespace_tokens(command);
  if (args.empty()) {
    throw Error("exec endpoint has an empty command");
  }
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw Error("cannot create pipes: " + std::string(std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    throw Error("fork failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    ::perror("execvp");
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);

  auto conn = std::make_unique<ScorerConnection>();
  conn->read_fd = from_child[0];
  conn->write_fd = to_child[1];
  conn->child = pid;
  conn->endpoint = endpoint;
  return conn;
}

std::unique_ptr<ScorerConnection> connect_unix(const std::string& path,
                                                         const std::string& endpoint) {
  const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0) {
    throw Error("cannot create socket: " + std::string(std::strerror(errno)));
  }
  struct sockaddr_un addr {};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) {
    ::close(fd);
    throw Error("unix socket path too long: " + path);
  }
  std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
  if (::connect(fd, reinterpret_cast<struct sockaddr*>(&addr), sizeof(addr)) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd);
    throw Error("cannot connect to scorer at " + endpoint + ": " + reason);
  }
  auto conn = std::make_unique<ScorerConnection>();
  conn->read_fd = fd;
  conn->write_fd = fd;
  conn->endpoint = endpoint;
  return conn;
}

}  // namespace

std::unique_ptr<ExternalScorer> ExternalScorer::connect(const std::string& endpoint,
                                                        ExternalScorerOptions options) {
  ignore_sigpipe_once();
  std::unique_ptr<ScorerConnection> conn;
  if (endpoint.rfind("exec:", 0) == 0) {
    conn = connect_exec(endpoint.substr(5), endpoint);
  } else if (endpoint.rfind("unix:", 0) == 0) {
    conn = connect_unix(endpoint.substr(5), endpoint);
  } else {
    throw Error("unsupported scorer endpoint \"" + endpoint +
                "\" (expected exec:<command> or unix:<path>)");
  }
  conn->timeout_ms = options.timeout_ms;

  // Session start: the server announces its protocol version.
  const std::string line = conn->read_line();
  json announce;
  try {
    announce = json::parse(line);
  } catch (const json::exception&) {
    throw ProtocolError("scorer announcement is not valid JSON: " + line);
  }
  if (!announce.is_object() || !announce.contains("protocol") ||
      !announce["protocol"].is_string()) {
    throw ProtocolError("scorer announcement is missing the protocol field: " + line);
  }
  if (announce["protocol"].get<std::string>() != kScorerProtocolVersion) {
    throw ProtocolError("scorer speaks \"" + announce["protocol"].get<std::string>() +
                        "\", expected \"" + kScorerProtocolVersion + "\"");
  }

  auto scorer = std::unique_ptr<ExternalScorer>(new ExternalScorer());
  scorer->conn_ = std::move(conn);
  return scorer;
}

ExternalScorer::~ExternalScorer() = default;

std::vector<double> ExternalScorer::score(std::string_view query, std::span<const AtomId> prefix,
                                          std::span<const AtomId> candidates) {
  const std::string request_id = "r" + std::to_string(conn_->next_request_id++);
  json request;
  request["id"] = request_id;
  request["query"] = std::string(query);
  request["prefix"] = std::vector<AtomId>(prefix.begin(), prefix.end());
  request["candidates"] = std::vector<AtomId>(candidates.begin(), candidates.end());
  conn_->write_line(request.dump());

  const std::string line = conn_->read_line();
  json response;
  try {
    response = json::parse(line);
  } catch (const json::exception&) {
    throw ProtocolError("malformed scorer response (not JSON): " + line);
  }
  if (!response.is_object() || !response.contains("id") || !response.contains("scores") ||
      !response["scores"].is_array()) {
    throw ProtocolError("malformed scorer response (need id + scores array): " + line);
  }
  if (!response["id"].is_string() || response["id"].get<std::string>() != request_id) {
    throw ProtocolError("scorer response id " + response["id"].dump() +
                        " does not echo request id \"" + request_id + "\"");
  }
  const auto& scores_json = response["scores"];
  if (scores_json.size() != candidates.size()) {
    throw ProtocolError("scorer returned " + std::to_string(scores_json.size()) +
                        " scores, expected " + std::to_string(candidates.size()));
  }
  std::vector<double> scores;
  scores.reserve(scores_json.size());
  for (std::size_t i = 0; i < scores_json.size(); ++i) {
    if (!scores_json[i].is_number()) {
      throw ProtocolError("scorer score at index " + std::to_string(i) + " is not a number");
    }
    const double value = scores_json[i].get<double>();
    if (!std::isfinite(value)) {
      throw ProtocolError("scorer returned a non-finite score at index " + std::to_string(i));
    }
    if (value < 0.0) {
      throw ProtocolError("scorer returned a negative score at index " + std::to_string(i));
    }
    scores.push_back(value);
  }
  return scores;
}

}  // namespace mgr
