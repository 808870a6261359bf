#include <cmath>
#include <map>
#include <set>

#include "doctest.h"

#include "arena/episode.hpp"
#include "fixtures.hpp"

using namespace arena;
using fixture::agent_item;
using fixture::arena_from_items;
using fixture::item;

namespace {

std::string maze_path() { return std::string(ARENA_SOURCE_DIR) + "/configs/radial_arm_maze.yml"; }

// Independent health bookkeeping: each component is applied and clamped in turn.
double clamp_health(double h) { return std::min(100.0, std::max(0.0, h)); }

}  // namespace

TEST_CASE("action table") {
  CHECK(kActionCount == 9);
  CHECK(action_name(Action::BackwardsRight) == "BackwardsRight");
  CHECK(!action_from_index(9));
  CHECK(!action_from_index(-1));
  CHECK(*action_from_index(1) == Action::Forwards);
  int turns = 0, moves = 0;
  for (int i = 0; i < kActionCount; ++i) {
    turns += action_turn(*action_from_index(i));
    moves += action_move(*action_from_index(i));
  }
  CHECK(turns == 0);
  CHECK(moves == 0);
}

TEST_CASE("reset state") {
  config::ArenaConfigFile file = config::load_config_file(maze_path());
  Episode ep = Episode::from_config(file, 0, 5);
  CHECK(ep.health() == 100.0);
  CHECK(ep.reward() == 0.0);
  CHECK(ep.step_index() == 0);
  CHECK(!ep.done());
  CHECK_THROWS_AS(Episode::from_config(file, 3, 5), std::out_of_range);

  Episode frozen(arena_from_items("    - !Item\n      name: Agent\n      frozenAgentDelays: [50]\n"), 1);
  CHECK(frozen.frozen_remaining() == 50);
}

TEST_CASE("empty arena times out with reward -1 and health 0") {
  Episode ep(arena_from_items("", 100), 3);
  StepResult r;
  for (int i = 0; i < 100; ++i) {
    REQUIRE(!ep.done());
    r = ep.step(Action::NoAction);
  }
  CHECK(r.done);
  CHECK(ep.done_reason() == DoneReason::Timeout);
  CHECK(std::abs(ep.reward() + 1.0) <= 1e-9);
  CHECK(ep.health() == 0.0);
  CHECK_THROWS_AS(ep.step(Action::NoAction), EpisodeError);
}

TEST_CASE("health rises by 100 x reward and clamps at 100") {
  // A value-0.5 goal 0.8 ahead: out of reach while idle, touched by one Forwards step.
  const std::string items = agent_item(20, 20) + item("GoodGoalMulti", 20, 20.8, 0.5, 0.5, 0.5);
  SUBCASE("from 40") {
    Episode ep(arena_from_items(items, 100), 1);
    for (int i = 0; i < 59; ++i) ep.step(Action::NoAction);
    CHECK(ep.health() == 41.0);
    StepResult r = ep.step(Action::Forwards);
    CHECK(r.reward_delta == doctest::Approx(0.5 - 0.01).epsilon(1e-12));
    CHECK(ep.health() == 90.0);
    CHECK(!ep.done());
  }
  SUBCASE("from 80") {
    Episode ep(arena_from_items(items, 100), 1);
    for (int i = 0; i < 20; ++i) ep.step(Action::NoAction);
    CHECK(ep.health() == 80.0);
    ep.step(Action::Forwards);
    CHECK(ep.health() == 100.0);
  }
}

TEST_CASE("hot zone drains ten times faster") {
  const std::string items = agent_item(20, 20) + item("HotZone", 20, 20, 6, 0, 6);
  Episode ep(arena_from_items(items, 500), 2);
  for (int i = 0; i < 50; ++i) {
    ep.step(Action::NoAction);
    CHECK(ep.agent_hot());
  }
  CHECK(std::abs(ep.reward() - (-1.0)) <= 1e-9);
  // 50 hot steps at t=500 also drain health exactly to zero.
  CHECK(ep.health() == 0.0);
  CHECK(ep.done_reason() == DoneReason::HealthZero);
}

TEST_CASE("death zone takes precedence over hot zone") {
  const std::string items =
      agent_item(20, 20) + item("HotZone", 20, 20, 6, 0, 6) + item("DeathZone", 20, 20, 4, 0, 4);
  SUBCASE("untimed") {
    Episode ep(arena_from_items(items, 0), 2);
    StepResult r = ep.step(Action::NoAction);
    CHECK(r.done);
    CHECK(ep.done_reason() == DoneReason::DeathZone);
    CHECK(ep.reward() == -1.0);
  }
  SUBCASE("timed: the hot rate is not charged on the death step") {
    Episode ep(arena_from_items(items, 500), 2);
    ep.step(Action::NoAction);
    CHECK(ep.done_reason() == DoneReason::DeathZone);
    CHECK(ep.reward() == doctest::Approx(-1.0 - 1.0 / 500).epsilon(1e-12));
    CHECK(!ep.finish().passed);
  }
}

TEST_CASE("sixty left turns return to the start yaw") {
  Episode ep(arena_from_items(agent_item(20, 20, 30), 0), 1);
  const double start = ep.world().agent().body.pose.yaw;
  for (int i = 0; i < 60; ++i) ep.step(Action::Left);
  CHECK(std::abs(ep.world().agent().body.pose.yaw - start) < 1e-9);
  ep.step(Action::Right);
  CHECK(ep.world().agent().body.pose.yaw == doctest::Approx(36.0));
}

TEST_CASE("forwards moves along the facing") {
  Episode ep(arena_from_items(agent_item(20, 20, 90), 0), 1);
  ep.step(Action::Forwards);
  const Vec3 p = ep.world().agent().body.pose.position;
  CHECK(p.x > 20.0);
  CHECK(std::abs(p.z - 20.0) < 1e-9);
}

TEST_CASE("frozen agent observes but neither acts nor pays time") {
  Episode ep(arena_from_items("    - !Item\n      name: Agent\n      positions:\n"
                              "      - !Vector3 {x: 20, y: 0, z: 20}\n      frozenAgentDelays: [5]\n",
                              100),
             1);
  for (int i = 0; i < 5; ++i) ep.step(Action::Forwards);
  CHECK(ep.reward() == 0.0);
  CHECK(ep.world().agent().body.pose.position.z == doctest::Approx(20.0));
  ep.step(Action::Forwards);
  CHECK(ep.reward() == doctest::Approx(-0.01));
  CHECK(ep.world().agent().body.pose.position.z > 20.0);
}

TEST_CASE("blackout schedules") {
  CHECK(!lights_state(7, {5, 10}));
  CHECK(lights_state(10, {5, 10}));
  CHECK(!lights_state(5, {5, 10}));
  CHECK(lights_state(4, {5, 10}));
  CHECK(!lights_state(25, {-20}));
  CHECK(lights_state(19, {-20}));
  CHECK(lights_state(40, {-20}));
  CHECK(!lights_state(100, {5, 10, 50}));
  CHECK(lights_state(0, {}));
}

TEST_CASE("pass rule is inclusive") {
  const std::string items = agent_item(20, 20) + item("GoodGoal", 20, 22, 2, 2, 2);
  Episode hit(arena_from_items(items, 0, 2.0), 1);
  while (!hit.done()) hit.step(Action::Forwards);
  EpisodeSummary s = hit.finish();
  CHECK(s.reason == DoneReason::Goal);
  CHECK(s.final_reward == 2.0);
  CHECK(s.passed);

  Episode miss(arena_from_items(items, 0, 2.0000001), 1);
  while (!miss.done()) miss.step(Action::Forwards);
  CHECK(!miss.finish().passed);
}

TEST_CASE("finish before done and skip") {
  Episode ep(arena_from_items("", 10), 1);
  CHECK_THROWS_AS(ep.finish(), EpisodeError);
  ep.skip();
  CHECK(ep.done_reason() == DoneReason::UserSkip);
  CHECK_THROWS_AS(ep.skip(), EpisodeError);
}

TEST_CASE("untimed arenas never time out or drain") {
  Episode ep(arena_from_items("", 0), 1);
  for (int i = 0; i < 3000; ++i) ep.step(Action::NoAction);
  CHECK(!ep.done());
  CHECK(ep.reward() == 0.0);
  CHECK(ep.health() == 100.0);
}

TEST_CASE("reward and health match an independent accumulator") {
  // Many fixed-value goals and a hot zone; the oracle reads consumption and zone
  // membership from the world, not from the engine's bookkeeping.
  std::string items = agent_item(20, 20) + item("HotZone", 12, 12, 8, 0, 8);
  for (int i = 0; i < 12; ++i)
    items += item(i % 3 == 0 ? "BadGoal" : "GoodGoalMulti", 4 + 3 * i, 30 - 2 * (i % 4), 0.5 + 0.1 * (i % 5),
                  1, 1);
  const config::ArenaSpec spec = arena_from_items(items, 400);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Episode ep(spec, seed);
    Rng policy(seed + 1000);
    double reward = 0.0, health = 100.0;
    while (!ep.done()) {
      std::map<EntityId, std::pair<EntityKind, double>> goals;
      for (const Entity& e : ep.world().entities)
        if (is_goal(e.kind)) goals[e.id] = {e.kind, valence(e)};
      ep.step(*action_from_index(static_cast<int>(policy.below(kActionCount))));
      std::set<EntityId> remaining;
      for (const Entity& e : ep.world().entities) remaining.insert(e.id);
      const Vec3 p = ep.world().agent().body.pose.position;
      // Agent sphere (radius 0.5, centre at zone mid-height) against the zone footprint.
      const double dx = std::max(std::abs(p.x - 12) - 4.0, 0.0), dz = std::max(std::abs(p.z - 12) - 4.0, 0.0);
      const bool hot = std::hypot(dx, dz) < 0.5;
      const double rate = hot ? 10.0 : 1.0;
      reward -= rate / 400;
      health = clamp_health(health - rate * 100.0 / 400);
      for (const auto& [id, kv] : goals) {
        if (remaining.count(id)) continue;
        const double v = kv.first == EntityKind::BadGoal ? -kv.second : kv.second;
        reward += v;
        health = clamp_health(health + 100.0 * v);
      }
      CHECK(std::abs(ep.reward() - reward) <= 1e-9);
      CHECK(std::abs(ep.health() - health) <= 1e-9);
    }
  }
}

TEST_CASE("trajectory csv round-trips and replays bitwise") {
  config::ArenaConfigFile file = config::load_config_file(maze_path());
  Episode ep = Episode::from_config(file, 0, 42);
  Rng policy(9);
  while (!ep.done() && ep.step_index() < 300) ep.step(*action_from_index(static_cast<int>(policy.below(9))));
  const std::string csv = ep.trajectory().to_csv();
  CHECK(csv.rfind("# arena-lab " + version_string() + " seed=42 arena=0\n", 0) == 0);
  CHECK(csv.find("\nstep,x,y,z,yaw,action,reward_delta,reward,health\n") != std::string::npos);
  const TrajectoryLog parsed = TrajectoryLog::from_csv(csv);
  CHECK(parsed.to_csv() == csv);
  CHECK(replay(file, parsed).to_csv() == csv);
  CHECK(verify_replay(file, csv).exact);

  // An edited reward cell is caught at its row.
  TrajectoryLog edited = parsed;
  edited.rows[17].reward += 0.25;
  ReplayVerdict v = verify_replay(file, edited.to_csv());
  CHECK(!v.exact);
  CHECK(v.first_divergent_step == 18);

  // Different physics diverges somewhere.
  physics::PhysicsParams other;
  other.drag = 0.8;
  ReplayVerdict w = verify_replay(file, csv, other);
  CHECK(!w.exact);
  CHECK(w.first_divergent_step.has_value());

  CHECK_THROWS(TrajectoryLog::from_csv(csv.substr(0, 40)));
  CHECK_THROWS(TrajectoryLog::from_csv("# arena-lab 0 seed=1 arena=0\nstep,x\n"));
}
