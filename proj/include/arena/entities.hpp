#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arena/physics.hpp"
#include "arena/rng.hpp"
#include "arena/vec.hpp"

namespace arena {

using physics::EntityId;

enum class EntityKind {
  Agent,
  Wall,
  WallTransparent,
  Ramp,
  CylinderTunnel,
  CylinderTunnelTransparent,
  LightBlock,
  HeavyBlock,
  UBlock,
  LBlock,
  JBlock,
  GoodGoal,
  GoodGoalMulti,
  BadGoal,
  GoodGoalBounce,
  GoodGoalMultiBounce,
  BadGoalBounce,
  DecayGoal,
  RipenGoal,
  GrowGoal,
  ShrinkGoal,
  HotZone,
  DeathZone,
  SpawnerTree,
  SpawnerDispenserTall,
  SpawnerDispenserShort,
  SpawnerButton,
  SignBoard,
};

inline constexpr std::array kAllKinds{
    EntityKind::Agent,          EntityKind::Wall,
    EntityKind::WallTransparent, EntityKind::Ramp,
    EntityKind::CylinderTunnel, EntityKind::CylinderTunnelTransparent,
    EntityKind::LightBlock,     EntityKind::HeavyBlock,
    EntityKind::UBlock,         EntityKind::LBlock,
    EntityKind::JBlock,         EntityKind::GoodGoal,
    EntityKind::GoodGoalMulti,  EntityKind::BadGoal,
    EntityKind::GoodGoalBounce, EntityKind::GoodGoalMultiBounce,
    EntityKind::BadGoalBounce,  EntityKind::DecayGoal,
    EntityKind::RipenGoal,      EntityKind::GrowGoal,
    EntityKind::ShrinkGoal,     EntityKind::HotZone,
    EntityKind::DeathZone,      EntityKind::SpawnerTree,
    EntityKind::SpawnerDispenserTall, EntityKind::SpawnerDispenserShort,
    EntityKind::SpawnerButton,  EntityKind::SignBoard,
};

std::string_view kind_name(EntityKind kind);
std::optional<EntityKind> kind_from_name(std::string_view name);

/// Raycast observation rows.
enum class RayCategory : int {
  Arena = 0,
  Immovable = 1,
  Movable = 2,
  GoodGoal = 3,
  GoodGoalMulti = 4,
  Negative = 5,
  Dispenser = 6,
  Button = 7,
};
inline constexpr int kRayCategoryCount = 8;

RayCategory ray_category(EntityKind kind);

bool is_goal(EntityKind kind);            // spherical valenced object
bool is_bounce_goal(EntityKind kind);
bool is_scheduled_goal(EntityKind kind);  // Decay, Ripen, Grow, Shrink
bool is_zone(EntityKind kind);
bool is_transparent(EntityKind kind);
bool is_movable(EntityKind kind);
bool is_dispenser(EntityKind kind);       // tree, tall, short, button
bool is_color_configurable(EntityKind kind);
bool is_size_configurable(EntityKind kind);

/// Canonical size of fixed-size kinds, and the default size of the others.
Vec3 default_size(EntityKind kind);
Rgb default_color(EntityKind kind);

enum class Skin { Hedgehog, Panda, Pig };
std::string_view skin_name(Skin skin);
std::optional<Skin> skin_from_name(std::string_view name);

inline constexpr std::array<std::string_view, 14> kSignSymbols{
    "left-arrow", "right-arrow", "up-arrow", "down-arrow", "u-turn-arrow", "letter-a", "letter-b",
    "letter-c",   "square",      "triangle", "circle",     "star",         "tick",     "cross"};

struct SignCell {
  Rgb color;
  bool random = false;
};

struct PixelGrid {
  int rows = 0;
  int cols = 0;
  std::vector<SignCell> cells;  // row-major
};

struct SignContent {
  std::variant<std::string, PixelGrid> content;
  Rgb symbol_color{0, 0, 0};
};

struct ScheduleSpec {
  double initial_value = 0.0;
  double final_value = 0.0;
  int delay = 0;
  double change_rate = 0.0;
};

struct ValenceSchedule {
  double initial_value = 0.0;
  double final_value = 0.0;
  int delay = 0;
  double change_rate = 0.0;  // sign ignored
  bool size_tracks_valence = false;
  int elapsed = 0;   // ticks seen
  int progress = 0;  // ticks in which the value moved (or would have)
  double current = 0.0;
};

struct ButtonState {
  double spawn_probability = 1.0;
  std::array<double, 3> reward_weights{1.0, 1.0, 1.0};  // GoodGoal, GoodGoalMulti, BadGoal
  Vec3 reward_spawn_position;
  int reset_duration = 0;
  int cooldown_remaining = 0;
};

inline constexpr int kUnlimitedSpawns = -1;

struct DispenserState {
  int remaining_spawn_count = kUnlimitedSpawns;
  int time_between_spawns = 1;
  int countdown = 1;
  double spawned_goal_size = 1.0;
  std::optional<ButtonState> button;
};

/// Fully resolved per-instance parameters, produced by config instantiation.
struct EntitySpec {
  EntityKind kind = EntityKind::Wall;
  Pose pose;
  Vec3 size{1.0, 1.0, 1.0};
  std::optional<Rgb> color;
  std::optional<Skin> skin;
  std::optional<int> frozen_delay;
  std::optional<ScheduleSpec> schedule;
  std::optional<int> spawn_count;
  std::optional<int> time_between_spawns;
  std::optional<double> spawn_size;
  std::optional<double> spawn_probability;
  std::optional<std::array<double, 3>> reward_weights;
  std::optional<Vec3> reward_spawn_position;
  std::optional<int> reset_duration;
  std::optional<SignContent> sign;
};

struct Entity {
  EntityId id = 0;
  EntityKind kind = EntityKind::Wall;
  physics::Body body;
  physics::Collider collider;
  Rgb color;
  Vec3 size;
  double value = 0.0;  // valence of plain goals
  std::optional<ValenceSchedule> schedule;
  std::optional<DispenserState> dispenser;
  std::optional<SignContent> sign;
  std::optional<Skin> skin;
  int frozen_delay = 0;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ScheduleSpec default_schedule(EntityKind kind);

/// Collider for a kind at a given size (spheres use size.x as diameter).
physics::Collider make_collider(EntityKind kind, const Vec3& size);
double kind_mass(EntityKind kind);

/// Throws SpecError when the spec carries attributes the kind does not take.
Entity build_entity(const EntitySpec& spec, EntityId id, Rng& rng);

/// Current valence of a goal (schedule value or plain value).
double valence(const Entity& e);

/// Sphere radius a Grow/Shrink goal has at a given value.
double scheduled_radius(double value);

/// Schedule value after `progress` moving ticks.
double schedule_value(const ValenceSchedule& s, int progress);

struct SpawnRequest {
  EntityKind kind = EntityKind::GoodGoalMulti;
  Vec3 position;  // bottom-centre
  double size = 1.0;
  Vec3 velocity;
  EntityId source = 0;
};

/// True if the collider placed on the body would overlap a solid other than `exclude`.
using OccupancyQuery =
    std::function<bool(const physics::Body&, const physics::Collider&, EntityId exclude)>;

/// Advances an entity's own timers by one step. Returns goals to spawn.
std::vector<SpawnRequest> tick_entity(Entity& entity, int step_index, Rng& rng,
                                      const OccupancyQuery& occupancy);

/// Presses a button. A press during cooldown leaves the state unchanged.
std::optional<SpawnRequest> press_button(Entity& button, Rng& rng);

/// True if a contact normal (pointing from the button toward the agent)
/// touches the button's pressable face.
bool is_button_face_contact(const Entity& button, const Vec3& normal);

struct ContactOutcome {
  double reward_delta = 0.0;
  bool ends_episode = false;
  bool consume_entity = false;
  bool hot = false;
  bool death = false;
};

ContactOutcome on_agent_contact(const Entity& entity);

}  // namespace arena
