#include "arena/protocol.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <stdexcept>

#include "arena/observations.hpp"

namespace arena::protocol {

namespace {

struct RequestError {
  std::string code;
  std::string message;
};

[[noreturn]] void fail(const char* code, std::string message) { throw RequestError{code, std::move(message)}; }

json reply(const json& seq, std::string_view type, json payload) {
  return json{{"seq", seq}, {"type", type}, {"payload", std::move(payload)}};
}

json error_reply(const json& seq, const std::string& code, const std::string& message) {
  return reply(seq, "error", json{{"code", code}, {"message", message}});
}

json vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json rgb(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

template <typename T>
T field(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    fail(code::kBadRequest, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

ObsSpec parse_obs_spec(const json& j) {
  ObsSpec spec;
  if (j.is_null()) {
    spec.raycast = ObsSpec::Rays{};
    spec.vector = true;
    return spec;
  }
  if (!j.is_object()) throw std::invalid_argument("obs_spec must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "raycast") {
      if (value.is_boolean()) {
        if (value.get<bool>()) spec.raycast = ObsSpec::Rays{};
        continue;
      }
      ObsSpec::Rays r;
      r.count = value.value("rays", r.count);
      r.fov = value.value("fov", r.fov);
      if (r.count < 1 || r.count % 2 == 0) throw std::invalid_argument("raycast.rays must be odd and positive");
      if (!(r.fov > 0 && r.fov <= 360)) throw std::invalid_argument("raycast.fov must lie in (0,360]");
      spec.raycast = r;
    } else if (key == "camera") {
      if (value.is_boolean()) {
        if (value.get<bool>()) spec.camera = ObsSpec::Camera{};
        continue;
      }
      ObsSpec::Camera c;
      c.size = value.value("size", c.size);
      c.grayscale = value.value("grayscale", c.grayscale);
      if (c.size < kMinCameraSize || c.size > kMaxCameraSize)
        throw std::invalid_argument("camera.size must lie in [" + std::to_string(kMinCameraSize) + "," +
                                    std::to_string(kMaxCameraSize) + "]");
      spec.camera = c;
    } else if (key == "vector") {
      spec.vector = value.get<bool>();
    } else {
      throw std::invalid_argument("unknown observation '" + key + "'");
    }
  }
  return spec;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length must be a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4 + 1);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw std::invalid_argument("invalid base64");
  // EVP_DecodeBlock keeps the bytes standing in for '=' padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string websocket_accept(std::string_view key) {
  const std::string material = std::string(key) + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  std::vector<std::uint8_t> digest(SHA_DIGEST_LENGTH);
  SHA1(reinterpret_cast<const unsigned char*>(material.data()), material.size(), digest.data());
  return base64_encode(digest);
}

Session::Session(std::string id, physics::PhysicsParams physics) : id_(std::move(id)), physics_(physics) {}

std::string Session::handle_text(std::string_view text) {
  json request;
  try {
    request = json::parse(text);
  } catch (const json::parse_error& e) {
    return error_reply(nullptr, code::kParseError, e.what()).dump();
  }
  return handle(request).dump();
}

json Session::handle(const json& request) {
  json seq = nullptr;
  try {
    if (!request.is_object()) fail(code::kBadRequest, "a message is a JSON object");
    if (request.contains("seq")) seq = request["seq"];
    if (!request.contains("type") || !request["type"].is_string()) fail(code::kBadRequest, "missing string field 'type'");
    const std::string type = request["type"];
    const json payload = request.value("payload", json::object());
    if (!payload.is_object()) fail(code::kBadRequest, "payload must be an object");

    if (type == "hello") return reply(seq, "hello", on_hello(payload));
    if (!greeted_) fail(code::kNoHello, "the first message must be hello");
    if (type == "load_config") return reply(seq, "config_loaded", on_load_config(payload));
    if (type == "reset") return reply(seq, "reset_result", on_reset(payload));
    if (type == "step") return reply(seq, "step_result", on_step(payload));
    if (type == "view_request") return reply(seq, "view", on_view(payload));
    if (type == "state_request") {
      if (!episode_) fail(code::kNoEpisode, "no episode; send reset first");
      return state_message(seq);
    }
    if (type == "skip_episode") return reply(seq, "episode_skipped", on_skip(payload));
    if (type == "stream") {
      json ack = on_stream(payload);
      stream_seq_ = stream_hz_ ? std::optional<json>(seq) : std::nullopt;
      return reply(seq, "stream_ack", std::move(ack));
    }
    fail(code::kBadRequest, "unknown message type '" + type + "'");
  } catch (const RequestError& e) {
    return error_reply(seq, e.code, e.message);
  } catch (const std::exception& e) {
    return error_reply(seq, code::kBadRequest, e.what());
  }
}

json Session::on_hello(const json& p) {
  const std::string version = field<std::string>(p, "version", "");
  if (version != kVersion)
    fail(code::kBadVersion, "server speaks " + std::string(kVersion) + ", client sent '" + version + "'");
  greeted_ = true;
  return json{{"version", kVersion},
              {"session", id_},
              {"server", "arena-lab " + version_string()},
              {"capabilities", json::array({"raycast", "camera", "vector", "state", "view"})}};
}

json Session::on_load_config(const json& p) {
  const std::string text = field<std::string>(p, "text", "");
  config::Diagnostics warnings;
  try {
    config_ = config::load_config(text, &warnings);
  } catch (const config::ConfigError& e) {
    json diags = json::array();
    std::string first;
    for (const auto& d : e.diagnostics) {
      diags.push_back({{"line", d.line}, {"column", d.column}, {"path", d.path}, {"message", d.message}});
      if (first.empty()) first = std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message;
    }
    throw RequestError{code::kConfigError, first.empty() ? e.what() : first};
  }
  episode_.reset();
  stream_hz_ = 0;
  json arenas = json::array();
  for (const auto& [idx, _] : config_->arenas) arenas.push_back(idx);
  json warn = json::array();
  for (const auto& d : warnings) warn.push_back(d.message);
  return json{{"arenas", arenas},
              {"show_notification", config_->show_notification},
              {"can_reset_episode", config_->can_reset_episode},
              {"can_change_perspective", config_->can_change_perspective},
              {"warnings", warn}};
}

json Session::on_reset(const json& p) {
  if (!config_) fail(code::kNoConfig, "no configuration loaded; send load_config first");
  const int index = field<int>(p, "arena_index", 0);
  const std::uint64_t seed = field<std::uint64_t>(p, "seed", 0);
  if (!config_->arenas.count(index)) fail(code::kBadArena, "no arena with index " + std::to_string(index));
  try {
    obs_ = parse_obs_spec(p.contains("obs_spec") ? p["obs_spec"] : json(nullptr));
  } catch (const std::invalid_argument& e) {
    fail(code::kBadRequest, e.what());
  }
  try {
    episode_ = std::make_unique<Episode>(Episode::from_config(*config_, index, seed, physics_));
  } catch (const std::exception& e) {
    episode_.reset();
    fail(code::kConfigError, e.what());
  }
  json out = episode_fields();
  out["obs"] = observe();
  out["seed"] = seed;
  out["arena_index"] = index;
  return out;
}

json Session::on_step(const json& p) {
  if (!episode_) fail(code::kNoEpisode, "no episode; send reset first");
  if (!p.contains("action") || !p["action"].is_number_integer()) fail(code::kBadAction, "action must be an integer 0..8");
  const auto action = action_from_index(p["action"].get<int>());
  if (!action) fail(code::kBadAction, "action must be an integer 0..8");
  if (episode_->done()) fail(code::kEpisodeDone, "episode is over; send reset");
  const StepResult r = episode_->step(*action);
  json out;
  out["obs"] = observe();
  out["reward_delta"] = r.reward_delta;
  out["done"] = r.done;
  json info = episode_fields();
  if (r.done) {
    const EpisodeSummary s = episode_->finish();
    info["final_reward"] = s.final_reward;
    if (config_->show_notification) info["passed"] = s.passed;
  }
  out["info"] = std::move(info);
  return out;
}

json Session::on_view(const json& p) {
  if (!episode_) fail(code::kNoEpisode, "no episode; send reset first");
  const int columns = field<int>(p, "columns", 160);
  const double fov = field<double>(p, "fov", kCameraFovDegrees);
  std::vector<ViewColumn> cols;
  try {
    cols = view_columns(episode_->world(), columns, fov);
  } catch (const ObservationError& e) {
    fail(code::kBadRequest, e.what());
  }
  const bool lit = episode_->lights_on();
  json arr = json::array();
  for (const auto& c : cols) {
    if (!lit || !c.hit) {
      arr.push_back({{"hit", false}, {"distance", nullptr}, {"rgb", json::array({0, 0, 0})}, {"category", nullptr}});
    } else {
      arr.push_back({{"hit", true}, {"distance", c.distance}, {"rgb", rgb(c.color)}, {"category", c.category}});
    }
  }
  return json{{"columns", arr}, {"fov", fov}, {"lights_on", lit}, {"step", episode_->step_index()}};
}

json Session::on_skip(const json&) {
  if (!episode_) fail(code::kNoEpisode, "no episode; send reset first");
  if (!config_->can_reset_episode) fail(code::kNotPermitted, "this configuration does not allow skipping episodes");
  if (episode_->done()) fail(code::kEpisodeDone, "episode is already over");
  episode_->skip();
  const EpisodeSummary s = episode_->finish();
  json out = episode_fields();
  out["final_reward"] = s.final_reward;
  if (config_->show_notification) out["passed"] = s.passed;
  return out;
}

json Session::on_stream(const json& p) {
  const int hz = field<int>(p, "hz", 0);
  if (hz != 0 && (hz < 1 || hz > 60)) fail(code::kBadRate, "hz must be 0 (off) or lie in [1,60]");
  if (hz != 0 && !episode_) fail(code::kNoEpisode, "no episode; send reset first");
  stream_hz_ = hz;
  return json{{"hz", hz}};
}

json Session::observe() const {
  json obs = json::object();
  const bool lit = episode_->lights_on();
  if (obs_.raycast) {
    obs["raycast"] = {{"rows", kRayCategoryCount},
                      {"cols", obs_.raycast->count},
                      {"data", raycast_observation(episode_->world(), obs_.raycast->count, obs_.raycast->fov, lit)}};
  }
  if (obs_.camera) {
    const Image img = camera_observation(episode_->world(), obs_.camera->size, obs_.camera->grayscale, lit);
    obs["camera"] = {{"width", img.width}, {"height", img.height}, {"channels", img.channels}, {"data", base64_encode(img.pixels)}};
  }
  if (obs_.vector) {
    const auto v = vector_observation(episode_->world(), episode_->health());
    obs["vector"] = std::vector<double>(v.begin(), v.end());
  }
  return obs;
}

json Session::episode_fields() const {
  const Episode& e = *episode_;
  return json{{"step", e.step_index()},
              {"t", e.t()},
              {"reward", e.reward()},
              {"health", e.health()},
              {"pass_mark", e.pass_mark()},
              {"done", e.done()},
              {"done_reason", done_reason_name(e.done_reason())},
              {"lights_on", e.lights_on()},
              {"frozen", e.frozen_remaining() > 0}};
}

json Session::state_message(const json& seq) const {
  json ents = json::array();
  for (const Entity& ent : episode_->world().entities) {
    ents.push_back({{"id", ent.id},
                    {"kind", kind_name(ent.kind)},
                    {"position", vec3(ent.body.pose.position)},
                    {"yaw", ent.body.pose.yaw},
                    {"size", vec3(ent.size)},
                    {"color", rgb(ent.color)},
                    {"velocity", vec3(ent.body.velocity)}});
  }
  json payload = episode_fields();
  payload["entities"] = std::move(ents);
  payload["agent_id"] = episode_->world().agent_id;
  return reply(seq, "state", std::move(payload));
}

}  // namespace arena::protocol
