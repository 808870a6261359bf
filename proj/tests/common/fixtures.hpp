#pragma once
// World builders shared by the unit and acceptance suites.

#include <string>

#include "arena/config.hpp"
#include "arena/entities.hpp"
#include "arena/world.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace arena;

inline config::ArenaSpec arena_from_items(const std::string& items, int t = 100, double pass_mark = 0.0,
                                          const std::string& extra = "") {
  const std::string text = "!ArenaConfig\narenas:\n  0: !Arena\n    pass_mark: " + config::format_number(pass_mark) +
                           "\n    t: " + std::to_string(t) + "\n" + extra + "    items:\n" + items;
  return config::load_config(text).arenas.at(0);
}

inline std::string agent_item(double x, double z, double yaw = 0.0) {
  return "    - !Item\n      name: Agent\n      positions:\n      - !Vector3 {x: " + config::format_number(x) +
         ", y: 0, z: " + config::format_number(z) + "}\n      rotations: [" + config::format_number(yaw) + "]\n";
}

inline std::string item(const std::string& name, double x, double z, double sx, double sy, double sz,
                        double yaw = 0.0) {
  using config::format_number;
  return "    - !Item\n      name: " + name + "\n      positions:\n      - !Vector3 {x: " + format_number(x) +
         ", y: 0, z: " + format_number(z) + "}\n      sizes:\n      - !Vector3 {x: " + format_number(sx) +
         ", y: " + format_number(sy) + ", z: " + format_number(sz) + "}\n      rotations: [" + format_number(yaw) +
         "]\n";
}

inline EntityId add(WorldState& w, EntityKind kind, Vec3 pos, Vec3 size, double yaw = 0.0) {
  EntitySpec spec;
  spec.kind = kind;
  spec.pose = {pos, yaw};
  spec.size = size;
  Entity e = build_entity(spec, w.next_id, w.rng);
  e.body.velocity = {};
  const EntityId id = add_entity(w, std::move(e));
  if (kind == EntityKind::Agent) w.agent_id = id;
  return id;
}

/// Agent plus `count` random static entities of mixed kinds and shapes.
inline WorldState random_world(Rng& rng, int count) {
  static constexpr EntityKind kinds[] = {
      EntityKind::Wall,          EntityKind::Ramp,       EntityKind::CylinderTunnel, EntityKind::HeavyBlock,
      EntityKind::UBlock,        EntityKind::LBlock,     EntityKind::GoodGoal,       EntityKind::GoodGoalMulti,
      EntityKind::BadGoal,       EntityKind::DecayGoal,  EntityKind::HotZone,        EntityKind::SpawnerTree,
      EntityKind::SpawnerButton, EntityKind::SignBoard,  EntityKind::WallTransparent, EntityKind::SpawnerDispenserTall};
  WorldState w;
  w.rng = Rng(rng.next_u64());
  add(w, EntityKind::Agent, {rng.uniform(2, 38), 0, rng.uniform(2, 38)}, {1, 1, 1}, rng.uniform(0, 360));
  for (int i = 0; i < count; ++i) {
    const EntityKind k = kinds[rng.below(std::size(kinds))];
    const Vec3 size{rng.uniform(0.5, 4), rng.uniform(0.5, 3), rng.uniform(0.5, 4)};
    add(w, k, {rng.uniform(3, 37), 0, rng.uniform(3, 37)}, size, rng.uniform(0, 360));
  }
  return w;
}

/// The world's colliders as an oracle scene, minus the agent.
inline oracle::Scene scene_of(const WorldState& w) {
  oracle::Scene s;
  s.arena = w.params.arena_size;
  for (const Entity& e : w.entities)
    if (e.id != w.agent_id) s.bodies.push_back({e.id, e.body, e.collider});
  return s;
}

}  // namespace fixture
