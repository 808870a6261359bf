#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"

#include "arena/observations.hpp"
#include "fixtures.hpp"

using namespace arena;

namespace {

WorldState lone_agent(Vec3 pos, double yaw) {
  WorldState w;
  fixture::add(w, EntityKind::Agent, pos, {1, 1, 1}, yaw);
  return w;
}

int nonzero_in_column(const std::vector<double>& m, int rays, int col) {
  int n = 0;
  for (int row = 0; row < kRayCategoryCount; ++row) n += m[static_cast<std::size_t>(row * rays + col)] != 0.0;
  return n;
}

}  // namespace

TEST_CASE("ray fan layout") {
  const auto off = ray_offsets(15, 60);
  REQUIRE(off.size() == 15);
  CHECK(off[7] == 0.0);
  CHECK(off[0] == doctest::Approx(-30.0));
  CHECK(off[14] == doctest::Approx(30.0));
  CHECK(off[1] - off[0] == doctest::Approx(60.0 / 14));
  CHECK(ray_offsets(1, 60) == std::vector<double>{0.0});
  CHECK_THROWS_AS(ray_offsets(4, 60), ObservationError);
  CHECK_THROWS_AS(ray_offsets(5, 0), ObservationError);
  CHECK(kRayMaxRange == doctest::Approx(40.0 * std::sqrt(2.0)));
}

TEST_CASE("fence at half range gives 0.5 in the centre column") {
  const double d = kRayMaxRange / 2;
  WorldState w = lone_agent({20, 0, 40 - d}, 0.0);
  const auto m = raycast_observation(w, 15, 60);
  REQUIRE(m.size() == 8 * 15);
  CHECK(m[0 * 15 + 7] == doctest::Approx(0.5).epsilon(1e-12));
  for (int row = 1; row < 8; ++row) CHECK(m[static_cast<std::size_t>(row * 15 + 7)] == 0.0);
}

TEST_CASE("categories land in their rows and left is left") {
  WorldState w = lone_agent({20, 0, 10}, 0.0);
  fixture::add(w, EntityKind::GoodGoal, {20, 0, 20}, {1, 1, 1});
  fixture::add(w, EntityKind::BadGoal, {15, 0, 20}, {1, 1, 1});      // left of a +z facing agent
  fixture::add(w, EntityKind::SpawnerButton, {25, 0, 20}, {1, 1, 1});  // right
  const auto m = raycast_observation(w, 3, 60);
  // Columns: left (-30 deg), centre, right (+30 deg).
  CHECK(m[3 * 3 + 1] > 0.0);
  CHECK(m[3 * 3 + 1] == doctest::Approx(1.0 - (10.0 - 0.5) / kRayMaxRange).epsilon(1e-6));

  const auto wide = raycast_observation(w, 41, 60);
  auto best_col = [&](int row) {
    int col = -1;
    double best = 0.0;
    for (int c = 0; c < 41; ++c)
      if (wide[static_cast<std::size_t>(row * 41 + c)] > best) best = wide[static_cast<std::size_t>(row * 41 + (col = c))];
    return col;
  };
  CHECK(best_col(5) >= 0);
  CHECK(best_col(5) < 20);
  CHECK(best_col(7) > 20);
  CHECK(best_col(3) == 20);
}

TEST_CASE("entries shrink as an object recedes") {
  double prev = 2.0;
  for (double z = 12; z < 38; z += 1.5) {
    WorldState w = lone_agent({20, 0, 5}, 0.0);
    fixture::add(w, EntityKind::Wall, {20, 0, z}, {4, 2, 0.5});
    const auto m = raycast_observation(w, 1, 60);
    CHECK(m[1] < prev);
    prev = m[1];
  }
}

TEST_CASE("random worlds: shape, range, exclusivity, march agreement") {
  Rng rng(31337);
  int compared = 0;
  for (int s = 0; s < 300; ++s) {
    WorldState w = fixture::random_world(rng, 8);
    const oracle::Scene scene = fixture::scene_of(w);
    const int rays = 1 + 2 * static_cast<int>(rng.below(10));
    const double fov = rng.uniform(10, 360);
    const auto m = raycast_observation(w, rays, fov);
    REQUIRE(m.size() == static_cast<std::size_t>(8 * rays));
    const auto off = ray_offsets(rays, fov);
    const Entity& agent = w.agent();
    const Vec3 origin = agent.body.pose.position + Vec3{0, kRayHeight, 0};
    for (int c = 0; c < rays; ++c) {
      CHECK(nonzero_in_column(m, rays, c) <= 1);
      const Vec3 dir = forward_from_yaw(agent.body.pose.yaw + off[static_cast<std::size_t>(c)]);
      const auto hit = oracle::march_hit(scene, origin, dir, kRayMaxRange, 2e-3);
      REQUIRE(hit);
      const int row = hit->id == physics::kFenceId ? 0 : static_cast<int>(ray_category(w.find(hit->id)->kind));
      const double expected = 1.0 - hit->distance / kRayMaxRange;
      const double got = m[static_cast<std::size_t>(row * rays + c)];
      CHECK(std::abs(got - expected) * kRayMaxRange <= 2e-3 + 1e-9);
      for (double v : m) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      ++compared;
    }
  }
  CHECK(compared > 300);
}

TEST_CASE("lights out zeroes rays and pixels but not the vector") {
  Rng rng(5);
  WorldState w = fixture::random_world(rng, 6);
  for (double v : raycast_observation(w, 15, 60, false)) CHECK(v == 0.0);
  Image img = camera_observation(w, 16, false, false);
  for (auto p : img.pixels) CHECK(p == 0);
  const auto vec = vector_observation(w, 73.0);
  CHECK(vec[0] == 73.0);
  CHECK(vec[4] == w.agent().body.pose.position.x);
}

TEST_CASE("vector observation of a stationary agent") {
  WorldState w = lone_agent({20, 0, 20}, 0.0);
  const auto v = vector_observation(w, 100.0);
  CHECK(v == std::array<double, 7>{100, 0, 0, 0, 20, 0, 20});
}

TEST_CASE("camera: sky above, floor below, size limits") {
  WorldState w = lone_agent({20, 0, 20}, 0.0);
  Image img = camera_observation(w, 64);
  CHECK(img.width == 64);
  CHECK(img.height == 64);
  CHECK(img.channels == 3);
  CHECK(img.pixels.size() == 64u * 64 * 3);
  CHECK(img.at(0, 32, 0) == kSkyColor.r);
  CHECK(img.at(0, 32, 1) == kSkyColor.g);
  CHECK(img.at(0, 32, 2) == kSkyColor.b);
  const int floor_r = img.at(63, 32, 0), floor_b = img.at(63, 32, 2);
  CHECK(floor_r > floor_b);  // warm floor tint
  CHECK(!(img.at(63, 32, 0) == kSkyColor.r && img.at(63, 32, 2) == kSkyColor.b));
  CHECK_THROWS_AS(camera_observation(w, 3), ObservationError);
  CHECK_THROWS_AS(camera_observation(w, 513), ObservationError);
  CHECK_NOTHROW(camera_observation(w, 4));
}

TEST_CASE("camera grayscale is Rec.601 luma of the colour frame") {
  Rng rng(8);
  WorldState w = fixture::random_world(rng, 10);
  Image rgb = camera_observation(w, 32);
  Image gray = camera_observation(w, 32, true);
  REQUIRE(gray.channels == 1);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) {
      const double y = 0.299 * rgb.at(r, c, 0) + 0.587 * rgb.at(r, c, 1) + 0.114 * rgb.at(r, c, 2);
      CHECK(gray.at(r, c) == static_cast<int>(std::lround(y)));
    }
}

TEST_CASE("camera shows an object ahead in its colour and is deterministic") {
  WorldState w = lone_agent({20, 0, 20}, 0.0);
  fixture::add(w, EntityKind::GoodGoal, {20, 0, 23}, {2, 2, 2});
  Image a = camera_observation(w, 32);
  Image b = camera_observation(w, 32);
  CHECK(a.pixels == b.pixels);
  const int r = a.at(16, 16, 0), g = a.at(16, 16, 1), bl = a.at(16, 16, 2);
  CHECK(g > r);
  CHECK(g > bl);
}

TEST_CASE("transparent walls tint rather than hide") {
  WorldState clear = lone_agent({20, 0, 20}, 0.0);
  fixture::add(clear, EntityKind::GoodGoal, {20, 0, 26}, {2, 2, 2});
  WorldState glass = clear;
  fixture::add(glass, EntityKind::WallTransparent, {20, 0, 23}, {6, 3, 0.2});
  const Image a = camera_observation(clear, 32), b = camera_observation(glass, 32);
  // Behind the glass the goal still dominates the green channel.
  CHECK(b.at(16, 16, 1) > b.at(16, 16, 0));
  CHECK(a.pixels != b.pixels);
  // Rays still see the transparent wall first.
  const auto m = raycast_observation(glass, 1, 60);
  CHECK(m[1] > 0.0);
}

TEST_CASE("view columns") {
  WorldState w = lone_agent({20, 0, 10}, 0.0);
  fixture::add(w, EntityKind::Wall, {20, 0, 20}, {40, 2, 1});
  const auto cols = view_columns(w, 9);
  REQUIRE(cols.size() == 9);
  for (const auto& c : cols) {
    CHECK(c.hit);
    CHECK(c.category == 1);
    CHECK(c.distance == doctest::Approx(9.5).epsilon(1e-9));  // perpendicular distance
    CHECK(c.color == default_color(EntityKind::Wall));
  }
  CHECK_THROWS_AS(view_columns(w, 0), ObservationError);
}

TEST_CASE("png export") {
  WorldState w = lone_agent({20, 0, 20}, 45.0);
  const std::string path = "test_frame.png";
  write_png(camera_observation(w, 16), path);
  std::ifstream in(path, std::ios::binary);
  char sig[8] = {};
  in.read(sig, 8);
  CHECK(std::string(sig + 1, 3) == "PNG");
  std::remove(path.c_str());
}
