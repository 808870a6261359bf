#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "arena/episode.hpp"
#include "arena/rng.hpp"

namespace arena::agents {

class AgentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- random policy ----

struct FixedDuration {
  int steps = 1;
};
/// Normal draw clipped below at 1, rounded to the nearest integer.
struct NormalDuration {
  double mean = 5.0;
  double sd = 1.0;
};
/// Number of Bernoulli(p) trials up to and including the first success.
struct GeometricDuration {
  double p = 0.5;
};
using DurationDistribution = std::variant<FixedDuration, NormalDuration, GeometricDuration>;

int draw_duration(const DurationDistribution& d, Rng& rng);

struct RandomPolicyParams {
  std::array<double, kActionCount> action_weights{1, 1, 1, 1, 1, 1, 1, 1, 1};
  DurationDistribution duration = NormalDuration{};
  double correlation = 0.0;  // chance of keeping the previous action

  /// Throws AgentError.
  void validate() const;
};

struct RandomMemory {
  std::optional<Action> current;
  int remaining = 0;
};

Action random_policy_step(const RandomPolicyParams& params, Rng& rng, RandomMemory& memory);

// ---- heuristic policy ----

enum class Exploration {
  TurnBursts,         // Forwards, with an occasional 90 degree turn
  ForwardsBackwards,  // random forward and backward movement actions
};

struct HeuristicPolicyParams {
  int ray_count = 15;
  double fov_degrees = 60.0;
  std::vector<int> target_rows{3, 4};
  /// Once any of these rows lights up, they replace target_rows for the rest
  /// of the episode.
  std::vector<int> followup_rows;
  double stuck_speed_epsilon = 0.01;
  int stuck_window = 10;
  int unstick_duration = 15;
  Exploration exploration = Exploration::TurnBursts;
  double turn_burst_chance = 0.1;
  int explore_hold = 5;  // steps each ForwardsBackwards draw is held

  void validate() const;

  /// 15 rays over 60 degrees chasing green and yellow goals.
  static HeuristicPolicyParams foraging();
  /// 101 rays over 358 degrees: the button first, then the goal it spawns.
  static HeuristicPolicyParams button();
};

struct HeuristicMemory {
  bool followup = false;
  int slow_steps = 0;
  int unstick_remaining = 0;
  Action unstick_action = Action::ForwardsLeft;
  int burst_remaining = 0;
  Action burst_action = Action::Left;
  int hold_remaining = 0;
  Action hold_action = Action::Forwards;
};

/// Throws AgentError when the raycast has the wrong shape.
Action heuristic_policy_step(const HeuristicPolicyParams& params, const std::vector<double>& raycast,
                             const std::array<double, 7>& vector_obs, Rng& rng, HeuristicMemory& memory);

// ---- harness ----

struct AgentSpec {
  std::variant<RandomPolicyParams, HeuristicPolicyParams> params;
  std::string name;

  /// "random", "heuristic", "heuristic-button", optionally followed by
  /// ":key=value,..." overrides (rays, fov, targets, followup, epsilon, window,
  /// unstick, explore, weights, duration, correlation).
  static AgentSpec parse(const std::string& text);
};

/// Stateful wrapper so callers can drive any spec step by step.
class Agent {
 public:
  Agent(const AgentSpec& spec, std::uint64_t seed);
  Action act(const Episode& episode);

 private:
  AgentSpec spec_;
  Rng rng_;
  RandomMemory random_;
  HeuristicMemory heuristic_;
};

/// Seed of the policy's own stream for an episode seed.
std::uint64_t policy_seed(std::uint64_t episode_seed);

struct EvaluationRow {
  std::string config;
  int episode = 0;
  std::uint64_t seed = 0;
  double reward = 0.0;
  bool passed = false;
  int steps = 0;
  std::string done_reason;  // "error" when the episode faulted
  std::string error;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;

  static constexpr std::string_view kHeader = "config,episode,seed,reward,passed,steps,done_reason";

  double mean() const;
  double median() const;
  double pass_rate() const;
  std::vector<double> rewards() const;
  std::string to_csv() const;
  static EvaluationReport from_csv(std::string_view text);
};

struct EvaluationOptions {
  int workers = 1;
  std::optional<std::filesystem::path> trajectory_dir;
  physics::PhysicsParams physics;
  int max_steps = 100000;  // guard for untimed arenas
};

/// Runs `episodes` episodes per config with seeds base_seed + i. Arenas of a
/// multi-arena file are visited in turn. Rows are ordered by config, then episode.
EvaluationReport run_evaluation(const std::vector<std::filesystem::path>& configs, const AgentSpec& agent,
                                int episodes, std::uint64_t base_seed, const EvaluationOptions& options = {});

/// Two-sided Mann-Whitney rank-sum test on final rewards.
struct RankSumResult {
  double rank_sum = 0.0;  // sum of a's midranks in the pooled sample
  double u = 0.0;         // rank_sum - n_a (n_a + 1) / 2
  double z = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

RankSumResult rank_sum_test(const std::vector<double>& a, const std::vector<double>& b);
RankSumResult compare_agents(const EvaluationReport& a, const EvaluationReport& b);

}  // namespace arena::agents
