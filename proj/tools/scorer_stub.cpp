// Reference server for the mgr-scorer/1 wire protocol. Serves uniform scores
// over stdio or a UNIX stream socket; the malformed modes exist to exercise
// client-side protocol validation.

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

using json = nlohmann::json;

namespace {

struct LineIo {
  int read_fd;
  int write_fd;

  bool read_line(std::string& line) {
    line.clear();
    char c = 0;
    while (true) {
      const ssize_t n = ::read(read_fd, &c, 1);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      if (n == 0) return !line.empty();
      if (c == '\n') return true;
      line += c;
    }
  }

  void write_line(const std::string& line) {
    std::string framed = line;
    framed += '\n';
    std::size_t off = 0;
    while (off < framed.size()) {
      const ssize_t n = ::write(write_fd, framed.data() + off, framed.size() - off);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        std::exit(0);  // client went away
      }
      off += static_cast<std::size_t>(n);
    }
  }
};

std::string make_response(const std::string& mode, const std::string& id, std::size_t n) {
  if (mode == "bad-json") {
    return "this is not json {{{";
  }
  if (mode == "non-finite") {
    // Handcrafted: an out-of-range literal the client must reject.
    std::string scores;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) scores += ",";
      scores += i == 0 ? "1e999" : "1";
    }
    return "{\"id\":\"" + id + "\",\"scores\":[" + scores + "]}";
  }

  json response;
  response["id"] = mode == "bad-id" ? id + "-mismatch" : id;
  std::size_t count = n;
  if (mode == "wrong-length") count = n > 0 ? n - 1 : 1;
  json scores = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    scores.push_back(mode == "negative" && i == 0 ? -1.0 : 1.0);
  }
  response["scores"] = std::move(scores);
  return response.dump();
}

int serve(LineIo io, const std::string& mode, const std::string& announce) {
  if (announce != "none") {
    io.write_line("{\"protocol\":\"" + announce + "\"}");
  }
  std::string line;
  while (io.read_line(line)) {
    if (line.empty()) continue;
    if (mode == "mute") continue;  // swallow requests; clients must time out
    json request;
    try {
      request = json::parse(line);
    } catch (const json::parse_error&) {
      io.write_line("{\"error\":\"bad request\"}");
      continue;
    }
    const std::string id = request.value("id", "");
    const std::size_t n = request.contains("candidates") ? request["candidates"].size() : 0;
    io.write_line(make_response(mode, id, n));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference mgr-scorer/1 server (uniform scores)"};
  std::string mode = "uniform";
  std::string listen;
  std::string announce = "mgr-scorer/1";
  app.add_option("--mode", mode, "uniform|wrong-length|negative|non-finite|bad-id|bad-json|mute")
      ->check(CLI::IsMember(
          {"uniform", "wrong-length", "negative", "non-finite", "bad-id", "bad-json", "mute"}));
  app.add_option("--listen", listen, "unix:<path> to serve one socket connection");
  app.add_option("--announce", announce,
                 "protocol string to announce, or 'none' to skip the announcement");
  CLI11_PARSE(app, argc, argv);

  if (listen.empty()) {
    return serve(LineIo{STDIN_FILENO, STDOUT_FILENO}, mode, announce);
  }
  if (listen.rfind("unix:", 0) != 0) {
    std::cerr << "only unix:<path> listen endpoints are supported\n";
    return 2;
  }
  const std::string path = listen.substr(5);
  ::unlink(path.c_str());

  const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0) {
    std::perror("socket");
    return 2;
  }
  struct sockaddr_un addr {};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) {
    std::cerr << "socket path too long\n";
    return 2;
  }
  std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
  if (::bind(fd, reinterpret_cast<struct sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd, 1) != 0) {
    std::perror("bind/listen");
    return 2;
  }
  const int client = ::accept(fd, nullptr, nullptr);
  if (client < 0) {
    std::perror("accept");
    return 2;
  }
  const int rc = serve(LineIo{client, client}, mode, announce);
  ::close(client);
  ::close(fd);
  ::unlink(path.c_str());
  return rc;
}
