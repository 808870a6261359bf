#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arena/config.hpp"
#include "arena/world.hpp"

namespace arena {

enum class Action {
  NoAction,
  Forwards,
  Left,
  Right,
  ForwardsLeft,
  ForwardsRight,
  Backwards,
  BackwardsLeft,
  BackwardsRight,
};
inline constexpr int kActionCount = 9;

std::string_view action_name(Action a);
std::optional<Action> action_from_index(int index);
inline int action_index(Action a) { return static_cast<int>(a); }
/// -1 left, 0, +1 right.
int action_turn(Action a);
/// -1 backwards, 0, +1 forwards.
int action_move(Action a);

enum class DoneReason { None, Goal, BadGoal, DeathZone, Timeout, HealthZero, UserSkip };
std::string_view done_reason_name(DoneReason r);
std::optional<DoneReason> done_reason_from_name(std::string_view name);

/// Lights on at `step`? Interval lists are half-open pairs [start,end); a trailing
/// unpaired start stays dark for good. A single negative entry -n alternates n on, n off.
bool lights_state(int step, const std::vector<int>& blackouts);

class EpisodeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct TrajectoryRow {
  int step = 0;
  Vec3 position;
  double yaw = 0.0;
  Action action = Action::NoAction;
  double reward_delta = 0.0;
  double reward = 0.0;
  double health = 0.0;
};

struct TrajectoryLog {
  std::string version;
  std::uint64_t seed = 0;
  int arena_index = 0;
  std::vector<TrajectoryRow> rows;

  static constexpr std::string_view kHeader = "step,x,y,z,yaw,action,reward_delta,reward,health";

  /// First line "# arena-lab <version> seed=<seed> arena=<index>", then the
  /// header and one row per step; numbers round-trip exactly.
  std::string to_csv() const;
  /// Throws std::runtime_error on malformed or truncated input.
  static TrajectoryLog from_csv(std::string_view text);
  std::vector<Action> actions() const;
};

struct StepResult {
  double reward_delta = 0.0;
  bool done = false;
  DoneReason reason = DoneReason::None;
  int step = 0;
  double health = 0.0;
  Vec3 position;
  Vec3 velocity;
};

struct EpisodeSummary {
  double final_reward = 0.0;
  double pass_mark = 0.0;
  bool passed = false;
  int steps = 0;
  DoneReason reason = DoneReason::None;
  TrajectoryLog trajectory;
};

inline constexpr double kMaxHealth = 100.0;

class Episode {
 public:
  Episode(const config::ArenaSpec& spec, std::uint64_t seed, const physics::PhysicsParams& params = {},
          int arena_index = 0);
  /// Throws std::out_of_range for a missing arena index.
  static Episode from_config(const config::ArenaConfigFile& file, int arena_index, std::uint64_t seed,
                             const physics::PhysicsParams& params = {});

  /// Advances one step. Throws EpisodeError once done.
  StepResult step(Action action);
  /// Ends the episode at the player's request.
  void skip();
  /// Throws EpisodeError before done.
  EpisodeSummary finish() const;

  const WorldState& world() const { return world_; }
  WorldState& world() { return world_; }
  int step_index() const { return step_; }
  int t() const { return t_; }
  double reward() const { return reward_; }
  double health() const { return health_; }
  double pass_mark() const { return pass_mark_; }
  int frozen_remaining() const { return frozen_remaining_; }
  bool lights_on() const { return lights_state(step_, blackouts_); }
  bool done() const { return reason_ != DoneReason::None; }
  DoneReason done_reason() const { return reason_; }
  bool agent_hot() const { return hot_; }
  std::uint64_t seed() const { return seed_; }
  int arena_index() const { return arena_index_; }
  const TrajectoryLog& trajectory() const { return log_; }

 private:
  void add_health(double delta);

  WorldState world_;
  std::uint64_t seed_ = 0;
  int arena_index_ = 0;
  int t_ = 0;
  double pass_mark_ = 0.0;
  std::vector<int> blackouts_;
  int step_ = 0;
  double reward_ = 0.0;
  double health_ = kMaxHealth;
  int frozen_remaining_ = 0;
  bool hot_ = false;
  DoneReason reason_ = DoneReason::None;
  TrajectoryLog log_;
};

/// Re-runs the logged actions under the same seed and arena.
TrajectoryLog replay(const config::ArenaConfigFile& file, const TrajectoryLog& log,
                     const physics::PhysicsParams& params = {});

struct ReplayVerdict {
  bool exact = false;
  std::optional<int> first_divergent_step;  // step number of the first differing row
  std::string message;
};

/// Compares a log against its re-simulation, row text by row text.
ReplayVerdict verify_replay(const config::ArenaConfigFile& file, std::string_view csv,
                            const physics::PhysicsParams& params = {});

std::string version_string();

}  // namespace arena
