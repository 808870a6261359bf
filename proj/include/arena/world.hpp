#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "arena/config.hpp"
#include "arena/entities.hpp"
#include "arena/physics.hpp"
#include "arena/rng.hpp"

namespace arena {

struct WorldState {
  std::vector<Entity> entities;  // ascending id
  EntityId next_id = 0;
  EntityId agent_id = 0;
  physics::PhysicsParams params;
  Rng rng;
  std::vector<std::string> warnings;

  Entity* find(EntityId id);
  const Entity* find(EntityId id) const;
  Entity& agent();
  const Entity& agent() const;
};

/// Assigns the next id and appends.
EntityId add_entity(WorldState& world, Entity entity);
void remove_entity(WorldState& world, EntityId id);

/// Solid entity (or the arena boundary, reported as kFenceId/kFloorId) that the
/// collider would penetrate by more than `tolerance`, if any.
std::optional<EntityId> first_overlap(const WorldState& world, const physics::Body& body,
                                      const physics::Collider& collider, EntityId exclude,
                                      double tolerance = 1e-6);

/// Places a requested goal; drops it with a warning if the spot is occupied.
std::optional<EntityId> realize_spawn(WorldState& world, const SpawnRequest& request);

std::vector<physics::RigidBody> rigid_bodies(const WorldState& world);
void write_back(WorldState& world, const std::vector<physics::RigidBody>& bodies);

/// Ray targets pointing into `world`; invalidated when entities change.
std::vector<physics::RayTarget> ray_targets(const WorldState& world);

class InstantiationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kPlacementAttempts = 100;

/// Resolves an arena description into a world. The agent is placed first, then
/// the other items in file order. Throws InstantiationError.
WorldState instantiate_arena(const config::ArenaSpec& spec, std::uint64_t seed,
                             const physics::PhysicsParams& params = {});

}  // namespace arena
