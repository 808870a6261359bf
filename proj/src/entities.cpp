#include "arena/entities.hpp"

#include <algorithm>
#include <cmath>

namespace arena {

namespace {

struct KindInfo {
  EntityKind kind;
  std::string_view name;
  RayCategory category;
};

constexpr std::array<KindInfo, 28> kKindTable{{
    {EntityKind::Agent, "Agent", RayCategory::Movable},
    {EntityKind::Wall, "Wall", RayCategory::Immovable},
    {EntityKind::WallTransparent, "WallTransparent", RayCategory::Immovable},
    {EntityKind::Ramp, "Ramp", RayCategory::Immovable},
    {EntityKind::CylinderTunnel, "CylinderTunnel", RayCategory::Immovable},
    {EntityKind::CylinderTunnelTransparent, "CylinderTunnelTransparent", RayCategory::Immovable},
    {EntityKind::LightBlock, "LightBlock", RayCategory::Movable},
    {EntityKind::HeavyBlock, "HeavyBlock", RayCategory::Movable},
    {EntityKind::UBlock, "UBlock", RayCategory::Movable},
    {EntityKind::LBlock, "LBlock", RayCategory::Movable},
    {EntityKind::JBlock, "JBlock", RayCategory::Movable},
    {EntityKind::GoodGoal, "GoodGoal", RayCategory::GoodGoal},
    {EntityKind::GoodGoalMulti, "GoodGoalMulti", RayCategory::GoodGoalMulti},
    {EntityKind::BadGoal, "BadGoal", RayCategory::Negative},
    {EntityKind::GoodGoalBounce, "GoodGoalBounce", RayCategory::GoodGoal},
    {EntityKind::GoodGoalMultiBounce, "GoodGoalMultiBounce", RayCategory::GoodGoalMulti},
    {EntityKind::BadGoalBounce, "BadGoalBounce", RayCategory::Negative},
    {EntityKind::DecayGoal, "DecayGoal", RayCategory::GoodGoalMulti},
    {EntityKind::RipenGoal, "RipenGoal", RayCategory::GoodGoalMulti},
    {EntityKind::GrowGoal, "GrowGoal", RayCategory::GoodGoalMulti},
    {EntityKind::ShrinkGoal, "ShrinkGoal", RayCategory::GoodGoalMulti},
    {EntityKind::HotZone, "HotZone", RayCategory::Negative},
    {EntityKind::DeathZone, "DeathZone", RayCategory::Negative},
    {EntityKind::SpawnerTree, "SpawnerTree", RayCategory::Dispenser},
    {EntityKind::SpawnerDispenserTall, "SpawnerDispenserTall", RayCategory::Dispenser},
    {EntityKind::SpawnerDispenserShort, "SpawnerDispenserShort", RayCategory::Dispenser},
    {EntityKind::SpawnerButton, "SpawnerButton", RayCategory::Button},
    {EntityKind::SignBoard, "SignBoard", RayCategory::Immovable},
}};

const KindInfo& info(EntityKind kind) {
  for (const auto& k : kKindTable)
    if (k.kind == kind) return k;
  throw std::logic_error("unknown entity kind");
}

// Fixed geometry of the dispensers, tree, button and sign board.
constexpr Vec3 kTreeSize{4.0, 5.0, 4.0};
constexpr double kTreeTrunkHalf = 0.5;
constexpr double kTreeTrunkHeight = 4.0;
constexpr double kTreeBranchHeight = 4.0;
constexpr double kTreeBranchRadius = 2.0;
constexpr Vec3 kDispenserTallSize{1.5, 3.0, 1.5};
constexpr Vec3 kDispenserShortSize{1.5, 1.5, 1.5};
constexpr Vec3 kButtonSize{1.0, 1.5, 1.0};
constexpr Vec3 kSignSize{2.0, 2.0, 0.2};
constexpr double kBounceSpeed = 1.0;
constexpr double kButtonFaceCos = 0.7071;
constexpr double kMinGoalRadius = 0.05;
// Tall enough for rays cast at the agent's centre height to register the zone.
constexpr double kMinZoneHeight = 1.0;

physics::Collider box(const Vec3& size, bool solid = true) {
  return {physics::Box{size * 0.5}, solid};
}

physics::Compound block_shape(EntityKind kind, const Vec3& s) {
  const double t = std::min(s.x, s.z) / 4.0;
  physics::Compound c;
  // Back bar along local -z spanning the full width.
  c.parts.push_back({{0.0, s.y / 2, -s.z / 2 + t / 2}, {s.x / 2, s.y / 2, t / 2}});
  const Vec3 arm_half{t / 2, s.y / 2, (s.z - t) / 2};
  const double arm_z = t / 2;
  if (kind == EntityKind::UBlock || kind == EntityKind::LBlock)
    c.parts.push_back({{-s.x / 2 + t / 2, s.y / 2, arm_z}, arm_half});
  if (kind == EntityKind::UBlock || kind == EntityKind::JBlock)
    c.parts.push_back({{s.x / 2 - t / 2, s.y / 2, arm_z}, arm_half});
  return c;
}

physics::Compound tunnel_shape(const Vec3& s) {
  const double w = s.x, h = s.y, len = s.z;
  const double t = std::max(0.1, 0.08 * w);
  const double wall_h = 0.4 * h;
  physics::Compound c;
  c.parts.push_back({{-w / 2 + t / 2, wall_h / 2, 0.0}, {t / 2, wall_h / 2, len / 2}});
  c.parts.push_back({{w / 2 - t / 2, wall_h / 2, 0.0}, {t / 2, wall_h / 2, len / 2}});
  // Arch: six chords of the half-ellipse from (w/2, wall_h) over (0, h - t/2).
  const double rx = w / 2 - t / 2;
  const double ry = h - t / 2 - wall_h;
  constexpr int kSegments = 6;
  for (int i = 0; i < kSegments; ++i) {
    const double a0 = kPi * i / kSegments;
    const double a1 = kPi * (i + 1) / kSegments;
    const double x0 = rx * std::cos(a0), y0 = wall_h + ry * std::sin(a0);
    const double x1 = rx * std::cos(a1), y1 = wall_h + ry * std::sin(a1);
    const double dx = x1 - x0, dy = y1 - y0;
    const double chord = std::sqrt(dx * dx + dy * dy);
    const double roll = std::atan2(dy, dx) * 180.0 / kPi;
    c.parts.push_back({{(x0 + x1) / 2, (y0 + y1) / 2, 0.0}, {chord / 2 + t / 4, t / 2, len / 2}, roll});
  }
  return c;
}

void update_schedule_color(Entity& e) {
  if (e.kind != EntityKind::DecayGoal && e.kind != EntityKind::RipenGoal) return;
  // Purple when full, grey when empty.
  const ValenceSchedule& s = *e.schedule;
  const double span = std::abs(s.final_value - s.initial_value);
  const double full = std::max(s.initial_value, s.final_value);
  const double f = span > 0.0 ? std::clamp((full - s.current) / span, 0.0, 1.0) : 0.0;
  e.color = {128, static_cast<int>(std::lround(128 * f)), 128};
}

double move_toward(double from, double to, double amount) {
  if (from < to) return std::min(to, from + amount);
  return std::max(to, from - amount);
}

[[noreturn]] void mismatch(EntityKind kind, std::string_view attribute) {
  throw SpecError("attribute '" + std::string(attribute) + "' not applicable to " +
                  std::string(kind_name(kind)));
}

}  // namespace

std::string_view kind_name(EntityKind kind) { return info(kind).name; }

std::optional<EntityKind> kind_from_name(std::string_view name) {
  for (const auto& k : kKindTable)
    if (k.name == name) return k.kind;
  // Accepted alias used in the observation description.
  if (name == "SignPosterBoard") return EntityKind::SignBoard;
  return std::nullopt;
}

RayCategory ray_category(EntityKind kind) { return info(kind).category; }

bool is_goal(EntityKind k) {
  switch (k) {
    case EntityKind::GoodGoal:
    case EntityKind::GoodGoalMulti:
    case EntityKind::BadGoal:
    case EntityKind::GoodGoalBounce:
    case EntityKind::GoodGoalMultiBounce:
    case EntityKind::BadGoalBounce:
    case EntityKind::DecayGoal:
    case EntityKind::RipenGoal:
    case EntityKind::GrowGoal:
    case EntityKind::ShrinkGoal:
      return true;
    default:
      return false;
  }
}

bool is_bounce_goal(EntityKind k) {
  return k == EntityKind::GoodGoalBounce || k == EntityKind::GoodGoalMultiBounce ||
         k == EntityKind::BadGoalBounce;
}

bool is_scheduled_goal(EntityKind k) {
  return k == EntityKind::DecayGoal || k == EntityKind::RipenGoal || k == EntityKind::GrowGoal ||
         k == EntityKind::ShrinkGoal;
}

bool is_zone(EntityKind k) { return k == EntityKind::HotZone || k == EntityKind::DeathZone; }

bool is_transparent(EntityKind k) {
  return k == EntityKind::WallTransparent || k == EntityKind::CylinderTunnelTransparent || is_zone(k);
}

bool is_movable(EntityKind k) {
  return k == EntityKind::LightBlock || k == EntityKind::HeavyBlock || k == EntityKind::UBlock ||
         k == EntityKind::LBlock || k == EntityKind::JBlock;
}

bool is_dispenser(EntityKind k) {
  return k == EntityKind::SpawnerTree || k == EntityKind::SpawnerDispenserTall ||
         k == EntityKind::SpawnerDispenserShort || k == EntityKind::SpawnerButton;
}

bool is_color_configurable(EntityKind k) {
  return k == EntityKind::Wall || k == EntityKind::Ramp || k == EntityKind::CylinderTunnel ||
         k == EntityKind::SpawnerDispenserTall || k == EntityKind::SpawnerDispenserShort ||
         k == EntityKind::SignBoard;
}

bool is_size_configurable(EntityKind k) {
  return !(k == EntityKind::Agent || is_dispenser(k) || k == EntityKind::SignBoard);
}

Vec3 default_size(EntityKind k) {
  switch (k) {
    case EntityKind::SpawnerTree:
      return kTreeSize;
    case EntityKind::SpawnerDispenserTall:
      return kDispenserTallSize;
    case EntityKind::SpawnerDispenserShort:
      return kDispenserShortSize;
    case EntityKind::SpawnerButton:
      return kButtonSize;
    case EntityKind::SignBoard:
      return kSignSize;
    case EntityKind::CylinderTunnel:
    case EntityKind::CylinderTunnelTransparent:
      return {2.5, 2.5, 2.5};
    default:
      return {1.0, 1.0, 1.0};
  }
}

Rgb default_color(EntityKind k) {
  switch (k) {
    case EntityKind::Agent:
      return {120, 90, 60};
    case EntityKind::Wall:
    case EntityKind::CylinderTunnel:
      return {153, 153, 153};
    case EntityKind::WallTransparent:
    case EntityKind::CylinderTunnelTransparent:
      return {200, 220, 255};
    case EntityKind::Ramp:
      return {200, 100, 200};
    case EntityKind::LightBlock:
    case EntityKind::HeavyBlock:
    case EntityKind::UBlock:
    case EntityKind::LBlock:
    case EntityKind::JBlock:
      return {128, 128, 128};
    case EntityKind::GoodGoal:
    case EntityKind::GoodGoalBounce:
      return {0, 200, 0};
    case EntityKind::GoodGoalMulti:
    case EntityKind::GoodGoalMultiBounce:
    case EntityKind::GrowGoal:
    case EntityKind::ShrinkGoal:
      return {230, 200, 0};
    case EntityKind::BadGoal:
    case EntityKind::BadGoalBounce:
      return {200, 0, 0};
    case EntityKind::DecayGoal:
      return {128, 0, 128};
    case EntityKind::RipenGoal:
      return {128, 128, 128};
    case EntityKind::HotZone:
      return {255, 140, 0};
    case EntityKind::DeathZone:
      return {255, 0, 0};
    case EntityKind::SpawnerTree:
      return {110, 70, 30};
    case EntityKind::SpawnerDispenserTall:
    case EntityKind::SpawnerDispenserShort:
      return {190, 190, 200};
    case EntityKind::SpawnerButton:
      return {232, 210, 170};
    case EntityKind::SignBoard:
      return {255, 255, 255};
  }
  return {0, 0, 0};
}

std::string_view skin_name(Skin s) {
  switch (s) {
    case Skin::Hedgehog:
      return "hedgehog";
    case Skin::Panda:
      return "panda";
    case Skin::Pig:
      return "pig";
  }
  return "hedgehog";
}

std::optional<Skin> skin_from_name(std::string_view n) {
  if (n == "hedgehog") return Skin::Hedgehog;
  if (n == "panda") return Skin::Panda;
  if (n == "pig") return Skin::Pig;
  return std::nullopt;
}

double scheduled_radius(double value) { return std::max(kMinGoalRadius, std::abs(value) / 2.0); }

double schedule_value(const ValenceSchedule& s, int progress) {
  return move_toward(s.initial_value, s.final_value, std::abs(s.change_rate) * progress);
}

ScheduleSpec default_schedule(EntityKind k) {
  switch (k) {
    case EntityKind::DecayGoal:
      return {2.5, 0.0, 0, 0.005};
    case EntityKind::RipenGoal:
      return {0.0, 2.5, 0, 0.005};
    case EntityKind::GrowGoal:
      return {1.0, 3.0, 0, 0.01};
    default:
      return {3.0, 1.0, 0, 0.01};
  }
}

double kind_mass(EntityKind k) {
  switch (k) {
    case EntityKind::HeavyBlock:
      return 2.0;
    case EntityKind::UBlock:
    case EntityKind::LBlock:
    case EntityKind::JBlock:
      return 1.5;
    default:
      return 1.0;
  }
}

physics::Collider make_collider(EntityKind k, const Vec3& size) {
  switch (k) {
    case EntityKind::Agent:
      return {physics::Sphere{0.5}, true};
    case EntityKind::Wall:
    case EntityKind::WallTransparent:
    case EntityKind::LightBlock:
    case EntityKind::HeavyBlock:
    case EntityKind::SpawnerDispenserTall:
    case EntityKind::SpawnerDispenserShort:
    case EntityKind::SpawnerButton:
    case EntityKind::SignBoard:
      return box(size);
    case EntityKind::Ramp:
      return {physics::RampPrism{size}, true};
    case EntityKind::CylinderTunnel:
    case EntityKind::CylinderTunnelTransparent:
      return {tunnel_shape(size), true};
    case EntityKind::UBlock:
    case EntityKind::LBlock:
    case EntityKind::JBlock:
      return {block_shape(k, size), true};
    case EntityKind::HotZone:
    case EntityKind::DeathZone:
      return box({size.x, std::max(size.y, kMinZoneHeight), size.z}, false);
    case EntityKind::SpawnerTree: {
      physics::Compound c;
      c.parts.push_back({{0.0, kTreeTrunkHeight / 2, 0.0},
                         {kTreeTrunkHalf, kTreeTrunkHeight / 2, kTreeTrunkHalf}});
      return {c, true};
    }
    default:  // goals
      return {physics::Sphere{std::max(kMinGoalRadius, size.x / 2.0)}, true};
  }
}

Entity build_entity(const EntitySpec& spec, EntityId id, Rng& rng) {
  const EntityKind k = spec.kind;
  if (spec.skin && k != EntityKind::Agent) mismatch(k, "skins");
  if (spec.frozen_delay && k != EntityKind::Agent) mismatch(k, "frozenAgentDelays");
  if (spec.color && !is_color_configurable(k)) mismatch(k, "colors");
  if (spec.schedule && !is_scheduled_goal(k)) mismatch(k, "initialValues");
  if (spec.sign && k != EntityKind::SignBoard) mismatch(k, "symbolNames");
  const bool spawner = is_dispenser(k);
  const bool timed = k == EntityKind::SpawnerTree || k == EntityKind::SpawnerDispenserTall ||
                     k == EntityKind::SpawnerDispenserShort;
  if (spec.spawn_count && !timed) mismatch(k, "spawnCount");
  if (spec.time_between_spawns && !timed) mismatch(k, "timeBetweenSpawns");
  if (spec.spawn_size && !spawner) mismatch(k, "spawnSize");
  const bool button = k == EntityKind::SpawnerButton;
  if (!button && (spec.spawn_probability || spec.reward_weights || spec.reward_spawn_position ||
                  spec.reset_duration))
    mismatch(k, "spawnProbability/rewardWeights/rewardSpawnPos/resetDuration");

  Entity e;
  e.id = id;
  e.kind = k;
  e.size = is_size_configurable(k) ? spec.size : default_size(k);
  if (k == EntityKind::Agent) e.size = {1.0, 1.0, 1.0};
  if (is_zone(k)) e.size.y = std::max(e.size.y, kMinZoneHeight);
  for (double c : {e.size.x, e.size.y, e.size.z})
    if (!(c > 0.0) || !std::isfinite(c)) throw SpecError("sizes must be positive");
  e.color = spec.color.value_or(default_color(k));
  e.body.pose = {spec.pose.position, normalize_yaw(spec.pose.yaw)};
  e.body.mass = kind_mass(k);
  const bool dynamic = k == EntityKind::Agent || is_movable(k) || is_goal(k);
  e.body.immovable = !dynamic;
  e.body.friction = is_movable(k);
  e.skin = spec.skin;
  if (k == EntityKind::Agent) {
    e.skin = spec.skin.value_or(Skin::Hedgehog);
    e.frozen_delay = spec.frozen_delay.value_or(0);
    if (e.frozen_delay < 0) throw SpecError("frozenAgentDelays must be >= 0");
  }

  if (is_goal(k)) e.value = e.size.x;
  if (is_scheduled_goal(k)) {
    const ScheduleSpec s = spec.schedule.value_or(default_schedule(k));
    if (s.delay < 0) throw SpecError("delays must be >= 0");
    ValenceSchedule v;
    v.initial_value = s.initial_value;
    v.final_value = s.final_value;
    v.delay = s.delay;
    v.change_rate = s.change_rate;
    v.size_tracks_valence = k == EntityKind::GrowGoal || k == EntityKind::ShrinkGoal;
    v.current = s.initial_value;
    if (v.size_tracks_valence) {
      const double d = 2.0 * scheduled_radius(v.current);
      e.size = {d, d, d};
    }
    e.schedule = v;
    e.value = v.current;
    update_schedule_color(e);
  }
  e.collider = make_collider(k, e.size);
  if (is_bounce_goal(k)) e.body.velocity = forward_from_yaw(e.body.pose.yaw) * kBounceSpeed;

  if (spawner) {
    DispenserState d;
    d.spawned_goal_size = spec.spawn_size.value_or(1.0);
    if (!(d.spawned_goal_size > 0.0)) throw SpecError("spawnSize must be positive");
    if (timed) {
      d.remaining_spawn_count = spec.spawn_count.value_or(kUnlimitedSpawns);
      d.time_between_spawns = spec.time_between_spawns.value_or(k == EntityKind::SpawnerTree ? 20 : 25);
      if (d.remaining_spawn_count < kUnlimitedSpawns)
        throw SpecError("spawnCount must be >= 0 or -1 (unlimited)");
      if (d.time_between_spawns < 1) throw SpecError("timeBetweenSpawns must be >= 1");
      d.countdown = d.time_between_spawns;
    } else {
      ButtonState b;
      b.spawn_probability = spec.spawn_probability.value_or(1.0);
      b.reward_weights = spec.reward_weights.value_or(std::array<double, 3>{1.0, 1.0, 1.0});
      b.reward_spawn_position =
          spec.reward_spawn_position.value_or(e.body.pose.position + forward_from_yaw(e.body.pose.yaw) * 5.0);
      b.reset_duration = spec.reset_duration.value_or(10);
      if (b.spawn_probability < 0.0 || b.spawn_probability > 1.0)
        throw SpecError("spawnProbability must be in [0,1]");
      double total = 0.0;
      for (double w : b.reward_weights) {
        if (w < 0.0) throw SpecError("rewardWeights must be non-negative");
        total += w;
      }
      if (!(total > 0.0)) throw SpecError("rewardWeights must not all be zero");
      if (b.reset_duration < 0) throw SpecError("resetDuration must be >= 0");
      d.button = b;
      d.remaining_spawn_count = kUnlimitedSpawns;
      d.countdown = 0;
    }
    e.dispenser = d;
  }

  if (k == EntityKind::SignBoard) {
    SignContent sc = spec.sign.value_or(SignContent{std::string("square"), {0, 0, 0}});
    if (auto* grid = std::get_if<PixelGrid>(&sc.content)) {
      if (grid->rows < 1 || grid->cols < 1 ||
          grid->cells.size() != static_cast<std::size_t>(grid->rows * grid->cols))
        throw SpecError("sign pixel grid must be at least 1x1 and rectangular");
      for (auto& cell : grid->cells)
        if (cell.random) cell.color = rng.bernoulli(0.5) ? sc.symbol_color : Rgb{255, 255, 255};
    } else {
      const auto& name = std::get<std::string>(sc.content);
      if (std::find(kSignSymbols.begin(), kSignSymbols.end(), name) == kSignSymbols.end())
        throw SpecError("unknown sign symbol '" + name + "'");
    }
    if (spec.color) sc.symbol_color = *spec.color;
    e.color = default_color(k);
    e.sign = sc;
  }
  return e;
}

double valence(const Entity& e) { return e.schedule ? e.schedule->current : e.value; }

std::vector<SpawnRequest> tick_entity(Entity& e, int /*step_index*/, Rng& rng,
                                      const OccupancyQuery& occupancy) {
  std::vector<SpawnRequest> out;
  if (e.schedule) {
    ValenceSchedule& s = *e.schedule;
    ++s.elapsed;
    if (s.elapsed > s.delay) {
      const double next = schedule_value(s, s.progress + 1);
      bool blocked = false;
      if (s.size_tracks_valence && next != s.current) {
        const double radius = scheduled_radius(next);
        physics::Collider grown{physics::Sphere{radius}, true};
        if (radius > scheduled_radius(s.current) && occupancy && occupancy(e.body, grown, e.id))
          blocked = true;
        if (!blocked) {
          e.collider = grown;
          e.size = {2 * radius, 2 * radius, 2 * radius};
        }
      }
      if (!blocked) {
        ++s.progress;
        s.current = next;
      }
    }
    update_schedule_color(e);
  }
  if (e.dispenser) {
    DispenserState& d = *e.dispenser;
    if (d.button) {
      if (d.button->cooldown_remaining > 0) --d.button->cooldown_remaining;
    } else if (d.remaining_spawn_count != 0) {
      if (--d.countdown <= 0) {
        d.countdown = d.time_between_spawns;
        if (d.remaining_spawn_count > 0) --d.remaining_spawn_count;
        SpawnRequest r;
        r.kind = EntityKind::GoodGoalMulti;
        r.size = d.spawned_goal_size;
        r.source = e.id;
        const Vec3& p = e.body.pose.position;
        const double radius = d.spawned_goal_size / 2;
        if (e.kind == EntityKind::SpawnerTree) {
          // Drop from the branch disc, outside the trunk so the fruit reaches the floor.
          const double inner = kTreeTrunkHalf * std::sqrt(2.0) + radius + 0.05;
          const double outer = std::max(kTreeBranchRadius, inner + 0.5);
          const double rr = std::sqrt(rng.uniform(inner * inner, outer * outer));
          const double ang = rng.uniform(0.0, 2.0 * kPi);
          r.position = {p.x + rr * std::cos(ang), p.y + kTreeBranchHeight, p.z + rr * std::sin(ang)};
        } else {
          const double half_depth = e.size.z / 2;
          r.position = p + forward_from_yaw(e.body.pose.yaw) * (half_depth + radius + 0.05);
        }
        out.push_back(r);
      }
    }
  }
  return out;
}

std::optional<SpawnRequest> press_button(Entity& e, Rng& rng) {
  if (!e.dispenser || !e.dispenser->button) return std::nullopt;
  ButtonState& b = *e.dispenser->button;
  if (b.cooldown_remaining > 0) return std::nullopt;
  b.cooldown_remaining = b.reset_duration;
  if (!(rng.uniform() < b.spawn_probability)) return std::nullopt;
  const double total = b.reward_weights[0] + b.reward_weights[1] + b.reward_weights[2];
  double u = rng.uniform() * total;
  int pick = 2;
  for (int i = 0; i < 3; ++i) {
    if (b.reward_weights[i] > 0.0 && u < b.reward_weights[i]) {
      pick = i;
      break;
    }
    u -= b.reward_weights[i];
  }
  while (b.reward_weights[pick] <= 0.0) --pick;  // guards rounding at the top end
  static constexpr EntityKind kinds[3] = {EntityKind::GoodGoal, EntityKind::GoodGoalMulti,
                                          EntityKind::BadGoal};
  SpawnRequest r;
  r.kind = kinds[pick];
  r.position = b.reward_spawn_position;
  r.size = e.dispenser->spawned_goal_size;
  r.source = e.id;
  return r;
}

bool is_button_face_contact(const Entity& button, const Vec3& normal) {
  return dot(normal, forward_from_yaw(button.body.pose.yaw)) >= kButtonFaceCos;
}

ContactOutcome on_agent_contact(const Entity& e) {
  ContactOutcome o;
  switch (e.kind) {
    case EntityKind::GoodGoal:
    case EntityKind::GoodGoalBounce:
      o.reward_delta = valence(e);
      o.ends_episode = true;
      o.consume_entity = true;
      break;
    case EntityKind::GoodGoalMulti:
    case EntityKind::GoodGoalMultiBounce:
    case EntityKind::DecayGoal:
    case EntityKind::RipenGoal:
    case EntityKind::GrowGoal:
    case EntityKind::ShrinkGoal:
      o.reward_delta = valence(e);
      o.consume_entity = true;
      break;
    case EntityKind::BadGoal:
    case EntityKind::BadGoalBounce:
      o.reward_delta = -valence(e);
      o.ends_episode = true;
      o.consume_entity = true;
      break;
    case EntityKind::DeathZone:
      o.reward_delta = -1.0;
      o.ends_episode = true;
      o.death = true;
      break;
    case EntityKind::HotZone:
      o.hot = true;
      break;
    default:
      break;
  }
  return o;
}

}  // namespace arena
