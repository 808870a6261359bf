#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "arena/protocol.hpp"

namespace arena::protocol {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kAcceptPollMs = 100;
constexpr int kIdlePollMs = 200;

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Reads what is available into buf; false on EOF or error.
bool read_some(int fd, std::string& buf) {
  char tmp[65536];
  for (;;) {
    const ssize_t n = ::recv(fd, tmp, sizeof tmp, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buf.append(tmp, static_cast<std::size_t>(n));
    return true;
  }
}

std::string ws_frame(std::uint8_t opcode, std::string_view payload) {
  std::string f;
  f.push_back(static_cast<char>(0x80 | opcode));
  const std::size_t n = payload.size();
  if (n < 126) {
    f.push_back(static_cast<char>(n));
  } else if (n <= 0xFFFF) {
    f.push_back(126);
    f.push_back(static_cast<char>(n >> 8));
    f.push_back(static_cast<char>(n & 0xFF));
  } else {
    f.push_back(127);
    for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF));
  }
  f.append(payload);
  return f;
}

struct WsFrame {
  bool fin = true;
  std::uint8_t opcode = 0;
  std::string payload;
};

// Pops one complete frame off the front of buf, if there is one.
std::optional<WsFrame> pop_frame(std::string& buf, std::size_t limit) {
  if (buf.size() < 2) return std::nullopt;
  const auto b0 = static_cast<std::uint8_t>(buf[0]), b1 = static_cast<std::uint8_t>(buf[1]);
  std::size_t pos = 2;
  std::uint64_t len = b1 & 0x7F;
  if (len == 126) {
    if (buf.size() < 4) return std::nullopt;
    len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[2])) << 8) | static_cast<std::uint8_t>(buf[3]);
    pos = 4;
  } else if (len == 127) {
    if (buf.size() < 10) return std::nullopt;
    len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<std::uint8_t>(buf[2 + static_cast<std::size_t>(i)]);
    pos = 10;
  }
  if (len > limit) throw std::runtime_error("frame too large");
  const bool masked = b1 & 0x80;
  const std::size_t need = pos + (masked ? 4 : 0) + static_cast<std::size_t>(len);
  if (buf.size() < need) return std::nullopt;
  WsFrame f;
  f.fin = b0 & 0x80;
  f.opcode = b0 & 0x0F;
  f.payload = buf.substr(pos + (masked ? 4 : 0), static_cast<std::size_t>(len));
  if (masked)
    for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ buf[pos + (i % 4)]);
  buf.erase(0, need);
  return f;
}

std::string header_value(const std::string& request, const std::string& name) {
  std::istringstream in(request);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t colon = line.find(':');
    if (colon != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < colon && same; ++i) same = std::tolower(line[i]) == std::tolower(name[i]);
    if (!same) continue;
    const std::size_t b = line.find_first_not_of(' ', colon + 1);
    const std::size_t e = line.find_last_not_of(' ');
    return b == std::string::npos ? std::string() : line.substr(b, e - b + 1);
  }
  return {};
}

std::string http_response(int status, std::string_view reason, std::string_view type, std::string_view body) {
  std::string r = "HTTP/1.1 " + std::to_string(status) + " " + std::string(reason) + "\r\nContent-Type: " +
                  std::string(type) + "\r\nContent-Length: " + std::to_string(body.size()) +
                  "\r\nConnection: close\r\n\r\n";
  r.append(body);
  return r;
}

std::string content_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

// Plain GET without an upgrade: a static asset, or 400 when no directory is served.
std::string static_response(const std::string& request, const std::optional<std::string>& root) {
  if (!root) return http_response(400, "Bad Request", "text/plain", "websocket upgrade required\n");
  const std::size_t sp = request.find(' ', 4);
  std::string target = request.substr(4, sp == std::string::npos ? std::string::npos : sp - 4);
  target = target.substr(0, target.find_first_of("?#"));
  if (target.empty() || target == "/") target = "/index.html";
  const std::filesystem::path rel = std::filesystem::path(target).relative_path().lexically_normal();
  if (rel.empty() || *rel.begin() == "..") return http_response(403, "Forbidden", "text/plain", "forbidden\n");
  const std::filesystem::path file = std::filesystem::path(*root) / rel;
  std::ifstream in(file, std::ios::binary);
  if (!in || std::filesystem::is_directory(file)) return http_response(404, "Not Found", "text/plain", "not found\n");
  std::ostringstream body;
  body << in.rdbuf();
  return http_response(200, "OK", content_type(file), body.str());
}

}  // namespace

Server::Server(ServeOptions options) : options_(std::move(options)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw std::runtime_error("bad listen address '" + options_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on " + options_.host + ":" + std::to_string(options_.port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::stop() { stopping_ = true; }

void Server::run() {
  std::vector<std::thread> connections;
  int index = 0;
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, kAcceptPollMs) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    connections.emplace_back([this, fd, i = index++] { serve_connection(fd, i); });
  }
  for (auto& t : connections) t.join();
}

void Server::serve_connection(int fd, int index) {
  Session session("s" + std::to_string(index), options_.physics);
  std::string buf;
  bool websocket = false;
  bool decided = false;
  bool handshaken = false;
  std::string fragments;
  auto next_frame = Clock::now();

  auto emit = [&](const std::string& text) {
    return websocket ? send_all(fd, ws_frame(0x1, text)) : send_all(fd, text + "\n");
  };

  try {
    while (!stopping_) {
      int timeout = kIdlePollMs;
      if (session.stream_hz() > 0 && session.episode()) {
        const auto now = Clock::now();
        if (now >= next_frame) {
          if (!emit(session.state_message(*session.stream_seq()).dump())) break;
          next_frame = now + std::chrono::microseconds(1'000'000 / session.stream_hz());
        }
        timeout = static_cast<int>(
            std::max<long>(0, std::chrono::duration_cast<std::chrono::milliseconds>(next_frame - Clock::now()).count()));
      }
      pollfd p{fd, POLLIN, 0};
      const int ready = ::poll(&p, 1, timeout);
      if (ready < 0 && errno != EINTR) break;
      if (ready <= 0) continue;
      if (!read_some(fd, buf)) break;

      if (!decided) {
        if (buf.size() < 4 && std::string_view("GET ").substr(0, buf.size()) == buf) continue;
        websocket = buf.rfind("GET ", 0) == 0;
        decided = true;
      }
      if (websocket && !handshaken) {
        const std::size_t end = buf.find("\r\n\r\n");
        if (end == std::string::npos) {
          if (buf.size() > 65536) break;
          continue;  // handshake still arriving
        }
        const std::string request = buf.substr(0, end + 4);
        buf.erase(0, end + 4);
        const std::string key = header_value(request, "Sec-WebSocket-Key");
        if (key.empty()) {
          send_all(fd, static_response(request, options_.static_dir));
          break;
        }
        const std::string resp = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                                 "Sec-WebSocket-Accept: " + websocket_accept(key) + "\r\n\r\n";
        if (!send_all(fd, resp)) break;
        handshaken = true;
      }

      if (websocket) {
        bool closed = false;
        while (auto f = pop_frame(buf, static_cast<std::size_t>(options_.max_line_bytes))) {
          if (f->opcode == 0x8) {
            send_all(fd, ws_frame(0x8, f->payload.substr(0, 2)));
            closed = true;
            break;
          }
          if (f->opcode == 0x9) {
            send_all(fd, ws_frame(0xA, f->payload));
            continue;
          }
          if (f->opcode == 0xA) continue;
          fragments += f->payload;
          if (!f->fin) continue;
          const std::string message = std::move(fragments);
          fragments.clear();
          if (!emit(session.handle_text(message))) {
            closed = true;
            break;
          }
        }
        if (closed) break;
      } else {
        std::size_t nl;
        bool closed = false;
        while ((nl = buf.find('\n')) != std::string::npos) {
          std::string line = buf.substr(0, nl);
          buf.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.find_first_not_of(" \t") == std::string::npos) continue;
          if (!emit(session.handle_text(line))) {
            closed = true;
            break;
          }
        }
        if (closed) break;
        if (buf.size() > static_cast<std::size_t>(options_.max_line_bytes)) {
          emit(json{{"seq", nullptr}, {"type", "error"}, {"payload", {{"code", code::kParseError}, {"message", "line too long"}}}}.dump());
          break;
        }
      }
    }
  } catch (const std::exception&) {
    // A broken framing layer ends this connection only.
  }
  ::close(fd);
}

}  // namespace arena::protocol
