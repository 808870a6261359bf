#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "arena/vec.hpp"

namespace arena::physics {

using EntityId = int;

/// Pseudo-ids for the arena boundary in contact events and ray hits.
inline constexpr EntityId kFloorId = -1;
inline constexpr EntityId kFenceId = -2;

struct Sphere {
  double radius = 0.5;
};

/// Yaw-rotated cuboid; the yaw comes from the owning body's pose.
struct Box {
  Vec3 half_extents{0.5, 0.5, 0.5};
};

/// Right-angled prism. Full extents; the slope rises toward local -z and the
/// high end is a vertical face.
struct RampPrism {
  Vec3 size{1.0, 1.0, 1.0};
};

struct CompoundPart {
  Vec3 offset;  // local centre relative to the body's bottom-centre
  Vec3 half_extents;
  double roll_degrees = 0.0;  // rotation about the local z axis
};

struct Compound {
  std::vector<CompoundPart> parts;
};

using Shape = std::variant<Sphere, Box, RampPrism, Compound>;

struct Collider {
  Shape shape = Sphere{};
  bool is_solid = true;
};

struct Body {
  Pose pose;
  Vec3 velocity;  // units per step
  double mass = 1.0;
  bool immovable = false;
  bool grounded = false;
  bool friction = false;  // kinetic friction applies while grounded
};

struct RigidBody {
  EntityId id = 0;
  Body body;
  Collider collider;
};

struct PhysicsParams {
  double gravity = 0.02;         // units/step^2
  double drag = 0.9;             // horizontal velocity factor per step
  double friction = 0.3;         // speed removed per step from grounded friction bodies
  double move_impulse = 0.15;    // agent forwards/backwards impulse per step
  double turn_degrees = 6.0;
  int min_substeps = 4;
  double max_substep_travel = 0.25;
  double max_ramp_ratio = 4.0;   // height:length above which a ramp slope acts as a wall
  double arena_size = kArenaSize;

  bool operator==(const PhysicsParams&) const = default;
};

struct Contact {
  EntityId a = 0;  // the body being reported (a dynamic body)
  EntityId b = 0;  // the other party: entity id, kFloorId or kFenceId
  Vec3 normal;     // points from b toward a
  double depth = 0.0;
  bool solid = true;
};

struct RayHit {
  double distance = 0.0;
  EntityId entity_id = 0;
  int category = 0;
  Vec3 normal;
};

/// Something a ray can hit.
struct RayTarget {
  EntityId id = 0;
  int category = 0;
  const Body* body = nullptr;
  const Collider* collider = nullptr;
};

class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies forces for one step: drag, applied impulse, gravity (airborne only),
/// and kinetic friction for grounded friction bodies. Positions are advanced by
/// resolve_collisions, which substeps the motion.
void integrate_step(std::span<RigidBody> bodies, std::span<const Vec3> applied_impulses,
                    const PhysicsParams& params);

/// Advances positions by velocity in substeps, separating solid overlaps after
/// each substep. Returns every contact touched during the step, plus overlaps
/// with non-solid volumes at the end of the step, sorted by (a, b).
std::vector<Contact> resolve_collisions(std::span<RigidBody> bodies, const PhysicsParams& params);

/// integrate_step followed by resolve_collisions.
std::vector<Contact> step(std::span<RigidBody> bodies, std::span<const Vec3> applied_impulses,
                          const PhysicsParams& params);

namespace detail {

struct Plane {
  Vec3 normal;  // outward
  double offset = 0.0;  // inside when dot(normal, p) <= offset
};

struct Ball {
  Vec3 center;
  double radius = 0.0;
};

struct Hull {
  std::array<Vec3, 8> verts{};
  int vert_count = 0;
  std::array<Plane, 6> planes{};
  int plane_count = 0;
  // Box fast path.
  bool is_box = false;
  Vec3 center;
  Vec3 half;
  std::array<Vec3, 3> axes{};
  // A slope too steep to walk on pushes horizontally instead of along its normal.
  int steep_plane = -1;
  Vec3 steep_push;
};

using Part = std::variant<Ball, Hull>;

void build_parts(const Body& body, const Collider& collider, const PhysicsParams& params,
                 std::vector<Part>& out);

}  // namespace detail

/// Precomputed world-space geometry for repeated ray queries against one
/// world snapshot.
class RayScene {
 public:
  /// When arena_size is set, the boundary fence (infinite height) is also a
  /// target with category 0.
  RayScene(std::span<const RayTarget> targets, std::optional<double> arena_size,
           const PhysicsParams& params = {});

  std::optional<RayHit> nearest(const Vec3& origin, const Vec3& direction, double max_range,
                                std::optional<EntityId> exclude = std::nullopt) const;

  /// Every entering intersection within range, unsorted.
  void all_hits(const Vec3& origin, const Vec3& direction, double max_range,
                std::vector<RayHit>& out, std::optional<EntityId> exclude = std::nullopt) const;

 private:
  struct Item {
    EntityId id = 0;
    int category = 0;
    Vec3 bound_center;
    double bound_radius = 0.0;
    std::vector<detail::Part> parts;
  };
  std::vector<Item> items_;
  std::optional<double> arena_size_;
};

/// Nearest intersection along a ray; a convenience over RayScene.
std::optional<RayHit> raycast(std::span<const RayTarget> targets, const Vec3& origin,
                              const Vec3& direction, double max_range,
                              std::optional<double> arena_size = std::nullopt,
                              std::optional<EntityId> exclude = std::nullopt);

/// Signed separation between two colliders at the given poses. Negative means
/// penetration; normal points from b toward a. Non-solid colliders are treated
/// as solid for the purpose of the query.
struct Separation {
  double distance = 0.0;
  Vec3 normal;
};
Separation separation(const Body& a, const Collider& ca, const Body& b,
                      const Collider& cb, const PhysicsParams& params);

/// True if the probe penetrates any solid body (other than `exclude`) or the
/// arena boundary by more than `tolerance`.
bool overlaps_any_solid(std::span<const RigidBody> bodies, const Body& probe,
                        const Collider& collider, EntityId exclude, const PhysicsParams& params,
                        double tolerance = 1e-6);

/// Half-extent of the collider's footprint along world x and z.
Vec3 footprint_half_extents(const Collider& collider, double yaw);

/// Height of the collider above the body's bottom-centre.
double collider_height(const Collider& collider);

}  // namespace arena::physics
