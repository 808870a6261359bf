#include "arena/world.hpp"

#include <algorithm>
#include <cmath>

namespace arena {

Entity* WorldState::find(EntityId id) {
  auto it = std::lower_bound(entities.begin(), entities.end(), id,
                             [](const Entity& e, EntityId v) { return e.id < v; });
  return it != entities.end() && it->id == id ? &*it : nullptr;
}

const Entity* WorldState::find(EntityId id) const {
  return const_cast<WorldState*>(this)->find(id);
}

Entity& WorldState::agent() {
  Entity* e = find(agent_id);
  if (!e) throw std::logic_error("world has no agent");
  return *e;
}

const Entity& WorldState::agent() const { return const_cast<WorldState*>(this)->agent(); }

EntityId add_entity(WorldState& world, Entity entity) {
  entity.id = world.next_id++;
  world.entities.push_back(std::move(entity));
  return world.entities.back().id;
}

void remove_entity(WorldState& world, EntityId id) {
  auto it = std::lower_bound(world.entities.begin(), world.entities.end(), id,
                             [](const Entity& e, EntityId v) { return e.id < v; });
  if (it != world.entities.end() && it->id == id) world.entities.erase(it);
}

std::optional<EntityId> first_overlap(const WorldState& world, const physics::Body& body,
                                      const physics::Collider& collider, EntityId exclude,
                                      double tolerance) {
  if (physics::overlaps_any_solid({}, body, collider, exclude, world.params, tolerance))
    return physics::kFenceId;
  for (const Entity& e : world.entities) {
    if (e.id == exclude || !e.collider.is_solid) continue;
    if (physics::separation(body, collider, e.body, e.collider, world.params).distance < -tolerance)
      return e.id;
  }
  return std::nullopt;
}

std::optional<EntityId> realize_spawn(WorldState& world, const SpawnRequest& request) {
  EntitySpec spec;
  spec.kind = request.kind;
  spec.pose = {request.position, 0.0};
  spec.size = {request.size, request.size, request.size};
  Entity e = build_entity(spec, world.next_id, world.rng);
  e.body.velocity = request.velocity;
  if (first_overlap(world, e.body, e.collider, -100)) {
    world.warnings.push_back("spawn of " + std::string(kind_name(request.kind)) + " from entity " +
                             std::to_string(request.source) + " dropped: position occupied");
    return std::nullopt;
  }
  return add_entity(world, std::move(e));
}

std::vector<physics::RigidBody> rigid_bodies(const WorldState& world) {
  std::vector<physics::RigidBody> out;
  out.reserve(world.entities.size());
  for (const Entity& e : world.entities) out.push_back({e.id, e.body, e.collider});
  return out;
}

void write_back(WorldState& world, const std::vector<physics::RigidBody>& bodies) {
  for (std::size_t i = 0; i < bodies.size(); ++i) world.entities[i].body = bodies[i].body;
}

std::vector<physics::RayTarget> ray_targets(const WorldState& world) {
  std::vector<physics::RayTarget> out;
  out.reserve(world.entities.size());
  for (const Entity& e : world.entities)
    out.push_back({e.id, static_cast<int>(ray_category(e.kind)), &e.body, &e.collider});
  return out;
}

namespace {

using config::Attribute;
using config::ItemSpec;
using config::Scalar;

const Scalar* pick(const ItemSpec& item, std::string_view key, std::size_t index) {
  const Attribute* a = item.find(key);
  if (!a || a->values.empty()) return nullptr;
  return a->values.size() == 1 ? &a->values[0] : &a->values[std::min(index, a->values.size() - 1)];
}

std::optional<double> pick_number(const ItemSpec& item, std::string_view key, std::size_t index) {
  const Scalar* s = pick(item, key, index);
  if (!s) return std::nullopt;
  return std::get<double>(*s);
}

std::optional<int> pick_int(const ItemSpec& item, std::string_view key, std::size_t index) {
  auto v = pick_number(item, key, index);
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

SignContent sign_from(const std::string& name, Rgb color) {
  SignContent sc;
  sc.symbol_color = color;
  if (std::find(kSignSymbols.begin(), kSignSymbols.end(), name) != kSignSymbols.end()) {
    sc.content = name;
    return sc;
  }
  PixelGrid grid;
  int col = 0;
  grid.rows = 1;
  for (char c : name) {
    if (c == '/') {
      grid.cols = col;
      col = 0;
      ++grid.rows;
      continue;
    }
    SignCell cell;
    if (c == '1') cell.color = color;
    else if (c == '0') cell.color = {255, 255, 255};
    else cell.random = true;
    grid.cells.push_back(cell);
    ++col;
  }
  grid.cols = col;
  sc.content = grid;
  return sc;
}

class Instantiator {
 public:
  explicit Instantiator(WorldState& w) : world_(w) {}

  std::string label(const ItemSpec& item, std::size_t index) const {
    return item.name + "[" + std::to_string(index) + "] (line " + std::to_string(item.line) + ")";
  }

  void place(const ItemSpec& item, std::size_t index) {
    Rng& rng = world_.rng;
    const EntityKind kind = *kind_from_name(item.name);
    EntitySpec spec;
    spec.kind = kind;

    // Bounce goals without a rotation launch in a random direction.
    double yaw = pick_number(item, "rotations", index).value_or(is_bounce_goal(kind) ? -1.0 : 0.0);
    if (yaw == -1.0) yaw = rng.uniform(0.0, 360.0);

    Vec3 size = default_size(kind);
    if (const Scalar* s = pick(item, "sizes", index)) {
      size = std::get<Vec3>(*s);
      for (double* c : {&size.x, &size.y, &size.z})
        if (*c == -1.0) *c = rng.uniform(0.5, 5.0);
    }
    spec.size = size;

    if (const Scalar* s = pick(item, "colors", index)) {
      Rgb c = std::get<Rgb>(*s);
      if (c.r == -1 && c.g == -1 && c.b == -1)
        c = {static_cast<int>(rng.below(256)), static_cast<int>(rng.below(256)),
             static_cast<int>(rng.below(256))};
      spec.color = c;
    }
    if (const Scalar* s = pick(item, "skins", index)) spec.skin = skin_from_name(std::get<std::string>(*s));
    spec.frozen_delay = pick_int(item, "frozenAgentDelays", index);
    if (is_scheduled_goal(kind)) {
      ScheduleSpec sched = default_schedule(kind);
      bool any = false;
      if (auto v = pick_number(item, "initialValues", index)) sched.initial_value = *v, any = true;
      if (auto v = pick_number(item, "finalValues", index)) sched.final_value = *v, any = true;
      if (auto v = pick_int(item, "delays", index)) sched.delay = *v, any = true;
      if (auto v = pick_number(item, "changeRates", index)) sched.change_rate = *v, any = true;
      if (any) spec.schedule = sched;
    }
    spec.spawn_count = pick_int(item, "spawnCount", index);
    spec.time_between_spawns = pick_int(item, "timeBetweenSpawns", index);
    spec.spawn_size = pick_number(item, "spawnSize", index);
    spec.spawn_probability = pick_number(item, "spawnProbability", index);
    if (const Attribute* w = item.find("rewardWeights"); w && w->values.size() == 3)
      spec.reward_weights = std::array<double, 3>{std::get<double>(w->values[0]),
                                                  std::get<double>(w->values[1]),
                                                  std::get<double>(w->values[2])};
    if (const Scalar* s = pick(item, "rewardSpawnPos", index)) spec.reward_spawn_position = std::get<Vec3>(*s);
    spec.reset_duration = pick_int(item, "resetDuration", index);
    if (const Scalar* s = pick(item, "symbolNames", index))
      spec.sign = sign_from(std::get<std::string>(*s), spec.color.value_or(Rgb{0, 0, 0}));

    Vec3 pos{-1.0, -1.0, -1.0};
    if (const Scalar* s = pick(item, "positions", index)) pos = std::get<Vec3>(*s);
    spec.pose = {{0.0, 0.0, 0.0}, yaw};

    Entity e;
    try {
      e = build_entity(spec, world_.next_id, rng);
    } catch (const SpecError& err) {
      throw InstantiationError(label(item, index) + ": " + err.what());
    }
    const bool random = pos.x == -1.0 || pos.z == -1.0 || pos.y == -1.0;
    if (pos.y == -1.0) pos.y = 0.0;
    const Vec3 half = physics::footprint_half_extents(e.collider, e.body.pose.yaw);
    const double arena = world_.params.arena_size;

    if (!random) {
      e.body.pose.position = pos;
      check_fixed(e, item, index);
    } else {
      if (half.x * 2 > arena || half.z * 2 > arena)
        throw InstantiationError(label(item, index) + ": too large to fit in the arena");
      bool placed = false;
      for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        Vec3 p = pos;
        if (pos.x == -1.0) p.x = rng.uniform(half.x, arena - half.x);
        if (pos.z == -1.0) p.z = rng.uniform(half.z, arena - half.z);
        e.body.pose.position = p;
        if (!e.collider.is_solid || !first_overlap(world_, e.body, e.collider, -100)) {
          placed = true;
          break;
        }
      }
      if (!placed)
        throw InstantiationError(label(item, index) + ": no free position found after " +
                                 std::to_string(kPlacementAttempts) + " attempts");
    }
    labels_.push_back(label(item, index));
    const EntityId id = add_entity(world_, std::move(e));
    if (kind == EntityKind::Agent) world_.agent_id = id;
  }

  void place_default_agent() {
    ItemSpec agent;
    agent.name = "Agent";
    agent.attributes.push_back({"rotations", {Scalar{-1.0}}});
    place(agent, 0);
  }

 private:
  void check_fixed(const Entity& e, const ItemSpec& item, std::size_t index) {
    if (!e.collider.is_solid) return;
    auto hit = first_overlap(world_, e.body, e.collider, -100);
    if (!hit) return;
    if (*hit == physics::kFenceId)
      throw InstantiationError(label(item, index) + " extends beyond the arena boundary");
    throw InstantiationError(label(item, index) + " overlaps " +
                             labels_[static_cast<std::size_t>(*hit)]);
  }

  WorldState& world_;
  std::vector<std::string> labels_;  // indexed by entity id
};

}  // namespace

WorldState instantiate_arena(const config::ArenaSpec& spec, std::uint64_t seed,
                             const physics::PhysicsParams& params) {
  WorldState world;
  world.params = params;
  world.rng = Rng(seed);
  Instantiator inst(world);

  const ItemSpec* agent_item = nullptr;
  for (const auto& item : spec.items)
    if (item.name == "Agent") {
      if (agent_item) throw InstantiationError("an arena holds at most one agent");
      agent_item = &item;
    }
  if (agent_item) {
    if (agent_item->instance_count() != 1) throw InstantiationError("an arena holds at most one agent");
    inst.place(*agent_item, 0);
  } else {
    world.warnings.push_back("no Agent item; agent spawned at a random pose");
    inst.place_default_agent();
  }
  for (const auto& item : spec.items) {
    if (&item == agent_item) continue;
    if (!kind_from_name(item.name)) throw InstantiationError("unknown entity name '" + item.name + "'");
    const std::size_t n = item.instance_count();
    for (std::size_t i = 0; i < n; ++i) inst.place(item, i);
  }
  return world;
}

}  // namespace arena
