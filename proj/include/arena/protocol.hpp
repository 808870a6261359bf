#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arena/config.hpp"
#include "arena/episode.hpp"

namespace arena::protocol {

using nlohmann::json;

inline constexpr std::string_view kVersion = "arena-lab/1";

/// Error codes carried in error{code, message}.
namespace code {
inline constexpr const char* kParseError = "parse_error";
inline constexpr const char* kBadRequest = "bad_request";
inline constexpr const char* kNoHello = "no_hello";
inline constexpr const char* kBadVersion = "bad_version";
inline constexpr const char* kConfigError = "config_error";
inline constexpr const char* kNoConfig = "no_config";
inline constexpr const char* kBadArena = "bad_arena";
inline constexpr const char* kNoEpisode = "no_episode";
inline constexpr const char* kEpisodeDone = "episode_done";
inline constexpr const char* kBadAction = "bad_action";
inline constexpr const char* kNotPermitted = "not_permitted";
inline constexpr const char* kBadRate = "bad_rate";
}  // namespace code

struct ObsSpec {
  struct Rays {
    int count = 15;
    double fov = 60.0;
  };
  struct Camera {
    int size = 64;
    bool grayscale = false;
  };
  std::optional<Rays> raycast;
  std::optional<Camera> camera;
  bool vector = false;
};

/// Parses reset's obs_spec; throws std::invalid_argument.
ObsSpec parse_obs_spec(const json& j);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept(std::string_view key);

/// One client's state. Not thread-safe; a connection owns its session.
class Session {
 public:
  explicit Session(std::string id = "session", physics::PhysicsParams physics = {});

  /// Exactly one response per request; the response echoes the request's seq.
  json handle(const json& request);
  /// Same, for one line of text; malformed JSON yields a parse_error response.
  std::string handle_text(std::string_view text);

  /// Current streaming rate (0 = off).
  int stream_hz() const { return stream_hz_; }
  std::optional<json> stream_seq() const { return stream_seq_; }
  /// A read-only state message (type "state"); never advances time.
  json state_message(const json& seq) const;

  const Episode* episode() const { return episode_.get(); }

 private:
  json on_hello(const json& p);
  json on_load_config(const json& p);
  json on_reset(const json& p);
  json on_step(const json& p);
  json on_view(const json& p);
  json on_skip(const json& p);
  json on_stream(const json& p);
  json observe() const;
  json episode_fields() const;

  std::string id_;
  physics::PhysicsParams physics_;
  bool greeted_ = false;
  std::optional<config::ArenaConfigFile> config_;
  std::unique_ptr<Episode> episode_;
  ObsSpec obs_;
  int stream_hz_ = 0;
  std::optional<json> stream_seq_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 7878;  // 0 picks a free port
  physics::PhysicsParams physics;
  int max_line_bytes = 16 << 20;
  /// When set, plain HTTP GETs (no WebSocket upgrade) are answered from this directory.
  std::optional<std::string> static_dir;
};

/// TCP listener. Each connection is one session on its own thread; a
/// connection opening with an HTTP GET is upgraded to WebSocket, otherwise it
/// speaks newline-delimited JSON.
class Server {
 public:
  /// Binds immediately; throws std::runtime_error when the endpoint is unavailable.
  explicit Server(ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const { return port_; }
  /// Accepts until stop() is called.
  void run();
  void stop();

 private:
  void serve_connection(int fd, int index);

  ServeOptions options_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
};

}  // namespace arena::protocol
