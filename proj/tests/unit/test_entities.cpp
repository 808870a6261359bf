#include <cmath>
#include <set>

#include "doctest.h"

#include "arena/entities.hpp"

using namespace arena;

namespace {

Entity make(EntityKind kind, Vec3 size = {1, 1, 1}, Vec3 pos = {20, 0, 20}) {
  EntitySpec spec;
  spec.kind = kind;
  spec.size = size;
  spec.pose = {pos, 0.0};
  Rng rng(1);
  return build_entity(spec, 0, rng);
}

Entity scheduled(EntityKind kind, ScheduleSpec s) {
  EntitySpec spec;
  spec.kind = kind;
  spec.pose = {{20, 0, 20}, 0.0};
  spec.schedule = s;
  Rng rng(1);
  return build_entity(spec, 0, rng);
}

}  // namespace

TEST_CASE("every kind maps to exactly one raycast row") {
  std::set<std::string_view> names;
  for (EntityKind k : kAllKinds) {
    const int c = static_cast<int>(ray_category(k));
    CHECK(c >= 0);
    CHECK(c < kRayCategoryCount);
    names.insert(kind_name(k));
    REQUIRE(kind_from_name(kind_name(k)).has_value());
    CHECK(*kind_from_name(kind_name(k)) == k);
  }
  CHECK(names.size() == kAllKinds.size());
  CHECK(kAllKinds.size() == 28);

  CHECK(ray_category(EntityKind::Wall) == RayCategory::Immovable);
  CHECK(ray_category(EntityKind::Ramp) == RayCategory::Immovable);
  CHECK(ray_category(EntityKind::SignBoard) == RayCategory::Immovable);
  CHECK(ray_category(EntityKind::HeavyBlock) == RayCategory::Movable);
  CHECK(ray_category(EntityKind::GoodGoal) == RayCategory::GoodGoal);
  CHECK(ray_category(EntityKind::GoodGoalBounce) == RayCategory::GoodGoal);
  CHECK(ray_category(EntityKind::GoodGoalMulti) == RayCategory::GoodGoalMulti);
  CHECK(ray_category(EntityKind::DecayGoal) == RayCategory::GoodGoalMulti);
  CHECK(ray_category(EntityKind::BadGoal) == RayCategory::Negative);
  CHECK(ray_category(EntityKind::DeathZone) == RayCategory::Negative);
  CHECK(ray_category(EntityKind::HotZone) == RayCategory::Negative);
  CHECK(ray_category(EntityKind::SpawnerTree) == RayCategory::Dispenser);
  CHECK(ray_category(EntityKind::SpawnerButton) == RayCategory::Button);
  CHECK(!kind_from_name("Unicorn"));
}

TEST_CASE("heavy block collider and mass") {
  Entity e = make(EntityKind::HeavyBlock, {2, 1, 1});
  auto* box = std::get_if<physics::Box>(&e.collider.shape);
  REQUIRE(box);
  CHECK(box->half_extents.x == doctest::Approx(1.0));
  CHECK(box->half_extents.y == doctest::Approx(0.5));
  CHECK(box->half_extents.z == doctest::Approx(0.5));
  CHECK(e.body.mass == 2.0);
  CHECK(make(EntityKind::LightBlock).body.mass == 1.0);
  CHECK(make(EntityKind::UBlock).body.mass == 1.5);
  CHECK(make(EntityKind::LBlock).body.mass == 1.5);
  CHECK(make(EntityKind::JBlock).body.mass == 1.5);
  CHECK(e.body.friction);
  CHECK(!e.body.immovable);
  CHECK(make(EntityKind::Wall).body.immovable);
}

TEST_CASE("agent is a unit body regardless of requested size") {
  Entity a = make(EntityKind::Agent, {3, 3, 3});
  CHECK(a.size == Vec3{1, 1, 1});
  CHECK(a.skin == Skin::Hedgehog);
}

TEST_CASE("goal valence equals size and contact semantics") {
  Entity g = make(EntityKind::GoodGoal, {2, 2, 2});
  auto* s = std::get_if<physics::Sphere>(&g.collider.shape);
  REQUIRE(s);
  CHECK(s->radius == doctest::Approx(1.0));
  ContactOutcome o = on_agent_contact(g);
  CHECK(o.reward_delta == doctest::Approx(2.0));
  CHECK(o.ends_episode);
  CHECK(o.consume_entity);

  ContactOutcome m = on_agent_contact(make(EntityKind::GoodGoalMulti, {1.5, 1.5, 1.5}));
  CHECK(m.reward_delta == doctest::Approx(1.5));
  CHECK(!m.ends_episode);
  CHECK(m.consume_entity);

  ContactOutcome b = on_agent_contact(make(EntityKind::BadGoal, {1, 1, 1}));
  CHECK(b.reward_delta == doctest::Approx(-1.0));
  CHECK(b.ends_episode);

  ContactOutcome d = on_agent_contact(make(EntityKind::DeathZone, {4, 0, 4}));
  CHECK(d.reward_delta == -1.0);
  CHECK(d.ends_episode);
  CHECK(!d.consume_entity);
  CHECK(d.death);

  ContactOutcome h = on_agent_contact(make(EntityKind::HotZone, {4, 0, 4}));
  CHECK(h.hot);
  CHECK(h.reward_delta == 0.0);
  CHECK(!h.ends_episode);

  ContactOutcome w = on_agent_contact(make(EntityKind::Wall));
  CHECK(w.reward_delta == 0.0);
  CHECK(!w.ends_episode);
  CHECK(!w.consume_entity);
}

TEST_CASE("bounce goals start moving along their yaw") {
  EntitySpec spec;
  spec.kind = EntityKind::GoodGoalBounce;
  spec.pose = {{20, 0, 20}, 90.0};
  Rng rng(1);
  Entity e = build_entity(spec, 0, rng);
  CHECK(e.body.velocity.x == doctest::Approx(1.0));
  CHECK(e.body.velocity.z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("decay schedule holds during the delay then moves linearly") {
  Entity e = scheduled(EntityKind::DecayGoal, {2.5, 0.0, 100, -0.003});
  CHECK(e.schedule->change_rate == -0.003);
  CHECK(e.schedule->delay == 100);
  Rng rng(1);
  for (int step = 1; step <= 150; ++step) {
    tick_entity(e, step, rng, {});
    if (step == 50) CHECK(valence(e) == doctest::Approx(2.5).epsilon(1e-12));
  }
  CHECK(valence(e) == doctest::Approx(2.5 - 0.003 * 50).epsilon(1e-12));
  CHECK(std::abs(valence(e) - 2.35) < 1e-9);
}

TEST_CASE("schedules are monotone and never overshoot") {
  struct Case {
    EntityKind kind;
    ScheduleSpec s;
  };
  const Case cases[] = {{EntityKind::DecayGoal, {2.5, 0.0, 7, 0.07}},
                        {EntityKind::RipenGoal, {0.0, 2.5, 3, -0.09}},
                        {EntityKind::GrowGoal, {1.0, 3.0, 0, 0.11}},
                        {EntityKind::ShrinkGoal, {3.0, 1.0, 5, 0.13}}};
  for (const Case& c : cases) {
    Entity e = scheduled(c.kind, c.s);
    Rng rng(1);
    const double sign = c.s.final_value > c.s.initial_value ? 1.0 : -1.0;
    const double lo = std::min(c.s.initial_value, c.s.final_value);
    const double hi = std::max(c.s.initial_value, c.s.final_value);
    double prev = valence(e);
    for (int step = 1; step <= 400; ++step) {
      tick_entity(e, step, rng, {});
      const double v = valence(e);
      CHECK(sign * (v - prev) >= 0.0);
      CHECK(v >= lo);
      CHECK(v <= hi);
      prev = v;
    }
    CHECK(prev == c.s.final_value);
  }
}

TEST_CASE("grow goal stops growing when blocked") {
  Entity g = scheduled(EntityKind::GrowGoal, {1.0, 3.0, 0, 0.05});
  // A wall face 1.2 units from the centre: the goal may reach radius 1.2 at most.
  const double wall_x = g.body.pose.position.x + 1.2;
  OccupancyQuery occ = [&](const physics::Body& b, const physics::Collider& c, EntityId) {
    const double r = std::get<physics::Sphere>(c.shape).radius;
    return b.pose.position.x + r > wall_x + 1e-9;
  };
  Rng rng(1);
  for (int step = 1; step <= 200; ++step) {
    tick_entity(g, step, rng, occ);
    const double r = std::get<physics::Sphere>(g.collider.shape).radius;
    CHECK(g.body.pose.position.x + r <= wall_x + 1e-9);
  }
  CHECK(valence(g) < 3.0);
}

TEST_CASE("dispenser emits on countdown expiry only while count remains") {
  EntitySpec spec;
  spec.kind = EntityKind::SpawnerDispenserTall;
  spec.pose = {{20, 0, 20}, 0.0};
  spec.time_between_spawns = 25;
  spec.spawn_count = 2;
  Rng rng(3);
  Entity d = build_entity(spec, 4, rng);
  std::vector<int> at;
  for (int step = 1; step <= 500; ++step) {
    for (const SpawnRequest& r : tick_entity(d, step, rng, {})) {
      at.push_back(step);
      CHECK(r.kind == EntityKind::GoodGoalMulti);
      CHECK(r.source == 4);
      CHECK(r.position.z > 20.0);  // out of the front face
    }
  }
  CHECK(at == std::vector<int>{25, 50});
}

TEST_CASE("dispenser with count n emits exactly n times") {
  for (int n : {0, 1, 5, 13}) {
    EntitySpec spec;
    spec.kind = EntityKind::SpawnerTree;
    spec.pose = {{20, 0, 20}, 0.0};
    spec.time_between_spawns = 3;
    spec.spawn_count = n;
    Rng rng(9);
    Entity t = build_entity(spec, 0, rng);
    int total = 0;
    for (int step = 1; step <= 10000; ++step) {
      auto out = tick_entity(t, step, rng, {});
      for (const auto& r : out) {
        const double dx = r.position.x - 20.0, dz = r.position.z - 20.0;
        CHECK(std::hypot(dx, dz) <= 2.0 + 1e-9);
        CHECK(r.position.y == doctest::Approx(4.0));
      }
      total += static_cast<int>(out.size());
    }
    CHECK(total == n);
  }
}

TEST_CASE("button probability, cooldown and weights") {
  EntitySpec spec;
  spec.kind = EntityKind::SpawnerButton;
  spec.pose = {{20, 0, 20}, 0.0};
  spec.reset_duration = 10;

  SUBCASE("probability zero never spawns") {
    spec.spawn_probability = 0.0;
    Rng rng(1);
    Entity b = build_entity(spec, 0, rng);
    for (int i = 0; i < 1000; ++i) {
      CHECK(!press_button(b, rng));
      b.dispenser->button->cooldown_remaining = 0;
    }
  }
  SUBCASE("press during cooldown leaves state unchanged") {
    Rng rng(1);
    Entity b = build_entity(spec, 0, rng);
    REQUIRE(press_button(b, rng));
    CHECK(b.dispenser->button->cooldown_remaining == 10);
    const Rng before = rng;
    CHECK(!press_button(b, rng));
    CHECK(rng == before);
    CHECK(b.dispenser->button->cooldown_remaining == 10);
    for (int i = 0; i < 10; ++i) tick_entity(b, i + 1, rng, {});
    CHECK(b.dispenser->button->cooldown_remaining == 0);
    CHECK(press_button(b, rng));
  }
  SUBCASE("equal weights give equal frequencies") {
    spec.reward_weights = std::array<double, 3>{1, 1, 1};
    spec.reward_spawn_position = Vec3{20, 0, 35};
    Rng rng(2024);
    Entity b = build_entity(spec, 0, rng);
    int counts[3] = {0, 0, 0};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      b.dispenser->button->cooldown_remaining = 0;
      auto r = press_button(b, rng);
      REQUIRE(r);
      CHECK(r->position == Vec3{20, 0, 35});
      if (r->kind == EntityKind::GoodGoal) ++counts[0];
      else if (r->kind == EntityKind::GoodGoalMulti) ++counts[1];
      else ++counts[2];
    }
    for (int c : counts) CHECK(std::abs(c / double(n) - 1.0 / 3.0) <= 0.02);
  }
  SUBCASE("zero weight kinds never appear") {
    spec.reward_weights = std::array<double, 3>{0, 1, 0};
    Rng rng(5);
    Entity b = build_entity(spec, 0, rng);
    for (int i = 0; i < 500; ++i) {
      b.dispenser->button->cooldown_remaining = 0;
      CHECK(press_button(b, rng)->kind == EntityKind::GoodGoalMulti);
    }
  }
}

TEST_CASE("button face faces along the item's rotation") {
  EntitySpec spec;
  spec.kind = EntityKind::SpawnerButton;
  spec.pose = {{20, 0, 20}, 90.0};
  Rng rng(1);
  Entity b = build_entity(spec, 0, rng);
  CHECK(is_button_face_contact(b, {1, 0, 0}));
  CHECK(!is_button_face_contact(b, {0, 0, 1}));
  CHECK(!is_button_face_contact(b, {-1, 0, 0}));
}

TEST_CASE("attribute and kind mismatches are spec errors") {
  Rng rng(1);
  EntitySpec wall;
  wall.kind = EntityKind::Wall;
  wall.skin = Skin::Panda;
  CHECK_THROWS_AS(build_entity(wall, 0, rng), SpecError);

  EntitySpec goal;
  goal.kind = EntityKind::GoodGoal;
  goal.color = Rgb{1, 2, 3};
  CHECK_THROWS_AS(build_entity(goal, 0, rng), SpecError);

  EntitySpec block;
  block.kind = EntityKind::LightBlock;
  block.schedule = ScheduleSpec{};
  CHECK_THROWS_AS(build_entity(block, 0, rng), SpecError);

  EntitySpec button;
  button.kind = EntityKind::SpawnerButton;
  button.reward_weights = std::array<double, 3>{0, 0, 0};
  CHECK_THROWS_AS(build_entity(button, 0, rng), SpecError);

  EntitySpec sign;
  sign.kind = EntityKind::SignBoard;
  sign.sign = SignContent{std::string("hexagon"), {}};
  CHECK_THROWS_AS(build_entity(sign, 0, rng), SpecError);
}

TEST_CASE("sign pixel grid resolves random cells") {
  PixelGrid g;
  g.rows = 2;
  g.cols = 2;
  g.cells.resize(4);
  for (auto& c : g.cells) c.random = true;
  EntitySpec spec;
  spec.kind = EntityKind::SignBoard;
  spec.sign = SignContent{g, {10, 20, 30}};
  Rng rng(4);
  Entity e = build_entity(spec, 0, rng);
  const auto& grid = std::get<PixelGrid>(e.sign->content);
  for (const auto& c : grid.cells)
    CHECK((c.color == Rgb{10, 20, 30} || c.color == Rgb{255, 255, 255}));
}
