#pragma once
// Operator-level settings shared by the CLI subcommands.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "arena/physics.hpp"

namespace arena {

struct RunConfig {
  physics::PhysicsParams physics;
  std::string host = "127.0.0.1";
  int port = 7878;
  std::string log_dir = "runs";
  std::optional<std::uint64_t> seed;  // unset defers to the environment
};

class RunConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// YAML form with every field spelled out; parse_run_config(dump_run_config(c)) == c.
std::string dump_run_config(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values throw RunConfigError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

/// Seed precedence: explicit flag, then run-config file, then the environment
/// variable, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> file_seed,
                           const char* env_value);

inline constexpr const char* kSeedEnvVar = "ARENA_LAB_SEED";

}  // namespace arena
