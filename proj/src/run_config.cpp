#include "arena/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "arena/config.hpp"

namespace arena {

namespace {

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw RunConfigError("run config: bad value for '" + key + "'");
  }
}

std::uint64_t parse_seed(std::string_view text, const std::string& where) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw RunConfigError(where + ": seed must be a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

}  // namespace

std::string dump_run_config(const RunConfig& c) {
  const auto& p = c.physics;
  std::ostringstream out;
  out << "# arena-lab " << ARENA_LAB_VERSION << " run configuration\n"
      << "seed: " << (c.seed ? std::to_string(*c.seed) : std::string("~")) << "\n"
      << "log_dir: " << c.log_dir << "\n"
      << "server:\n"
      << "  host: " << c.host << "\n"
      << "  port: " << c.port << "\n"
      << "physics:\n"
      << "  gravity: " << config::format_number(p.gravity) << "\n"
      << "  drag: " << config::format_number(p.drag) << "\n"
      << "  friction: " << config::format_number(p.friction) << "\n"
      << "  move_impulse: " << config::format_number(p.move_impulse) << "\n"
      << "  turn_degrees: " << config::format_number(p.turn_degrees) << "\n"
      << "  min_substeps: " << p.min_substeps << "\n"
      << "  max_substep_travel: " << config::format_number(p.max_substep_travel) << "\n"
      << "  max_ramp_ratio: " << config::format_number(p.max_ramp_ratio) << "\n"
      << "  arena_size: " << config::format_number(p.arena_size) << "\n";
  return out.str();
}

RunConfig parse_run_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw RunConfigError("run config: " + std::string(e.what()));
  }
  RunConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw RunConfigError("run config: top level must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "seed") {
      if (v.IsNull()) c.seed.reset();
      else c.seed = parse_seed(scalar<std::string>(v, key), "run config");
    } else if (key == "log_dir") {
      c.log_dir = scalar<std::string>(v, key);
    } else if (key == "server") {
      if (!v.IsMap()) throw RunConfigError("run config: 'server' must be a mapping");
      for (const auto& s : v) {
        const auto k = s.first.as<std::string>();
        if (k == "host") c.host = scalar<std::string>(s.second, k);
        else if (k == "port") c.port = scalar<int>(s.second, k);
        else throw RunConfigError("run config: unknown key 'server." + k + "'");
      }
      if (c.port < 0 || c.port > 65535) throw RunConfigError("run config: port out of range");
    } else if (key == "physics") {
      if (!v.IsMap()) throw RunConfigError("run config: 'physics' must be a mapping");
      auto& p = c.physics;
      for (const auto& s : v) {
        const auto k = s.first.as<std::string>();
        if (k == "gravity") p.gravity = scalar<double>(s.second, k);
        else if (k == "drag") p.drag = scalar<double>(s.second, k);
        else if (k == "friction") p.friction = scalar<double>(s.second, k);
        else if (k == "move_impulse") p.move_impulse = scalar<double>(s.second, k);
        else if (k == "turn_degrees") p.turn_degrees = scalar<double>(s.second, k);
        else if (k == "min_substeps") p.min_substeps = scalar<int>(s.second, k);
        else if (k == "max_substep_travel") p.max_substep_travel = scalar<double>(s.second, k);
        else if (k == "max_ramp_ratio") p.max_ramp_ratio = scalar<double>(s.second, k);
        else if (k == "arena_size") p.arena_size = scalar<double>(s.second, k);
        else throw RunConfigError("run config: unknown key 'physics." + k + "'");
      }
      if (p.min_substeps < 1 || p.max_substep_travel <= 0 || p.arena_size <= 0 || p.drag < 0 || p.drag > 1)
        throw RunConfigError("run config: physics values out of range");
    } else {
      throw RunConfigError("run config: unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RunConfigError("cannot read run config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> file_seed,
                           const char* env_value) {
  if (flag) return *flag;
  if (file_seed) return *file_seed;
  if (env_value && *env_value) return parse_seed(env_value, kSeedEnvVar);
  return 0;
}

}  // namespace arena
