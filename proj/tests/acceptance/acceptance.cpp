// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// the number of failing criteria (0 when all pass).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "arena/agents.hpp"
#include "arena/config.hpp"
#include "arena/entities.hpp"
#include "arena/episode.hpp"
#include "arena/observations.hpp"
#include "arena/procgen.hpp"
#include "arena/protocol.hpp"
#include "fixtures.hpp"
#include "net_client.hpp"
#include "oracles.hpp"
#include "template_fuzz.hpp"

using namespace arena;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string source(const std::string& rel) { return std::string(ARENA_SOURCE_DIR) + "/" + rel; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1 ------------------------------------------------------------------------
Outcome golden_parse() {
  const std::string text = read_text(source("configs/radial_arm_maze.yml"));
  const auto t0 = Clock::now();
  const config::ParseResult r = config::parse_config(text);
  config::Diagnostics diags = r.diagnostics;
  if (r.config) {
    const auto v = config::validate(*r.config);
    diags.insert(diags.end(), v.begin(), v.end());
  }
  const double secs = seconds_since(t0);
  if (!r.config) return {false, "parse failed"};
  const auto& a = r.config->arenas.at(0);
  std::map<std::string, std::size_t> counts;
  for (const auto& item : a.items) counts[item.name] += item.instance_count();
  const std::map<std::string, std::size_t> expected{{"Agent", 1},    {"Wall", 8},          {"Ramp", 8},
                                                    {"GoodGoal", 1}, {"GoodGoalMulti", 1}, {"DecayGoal", 1},
                                                    {"RipenGoal", 1}};
  const config::ItemSpec* decay = nullptr;
  for (const auto& item : a.items)
    if (item.name == "DecayGoal") decay = &item;
  auto num = [&](const char* key) { return std::get<double>(decay->find(key)->values.at(0)); };
  const bool decay_ok = decay && num("initialValues") == 2.5 && num("finalValues") == 0.0 && num("delays") == 100.0 &&
                        std::abs(num("changeRates")) == 0.003;
  const bool ok = counts == expected && a.pass_mark == 8.0 && a.t == 500 && decay_ok && diags.empty() && secs < 1.0;
  return {ok, fmt("kinds/counts %s, pass_mark %g, t %d, decay %s, %zu diagnostics, %.4f s", counts == expected ? "match" : "DIFFER",
                  a.pass_mark, a.t, decay_ok ? "2.5->0 delay 100 rate 0.003" : "WRONG", diags.size(), secs)};
}

// 2 ------------------------------------------------------------------------
Outcome timeout_invariant() {
  Episode ep(fixture::arena_from_items("", 100), 1);
  for (int i = 0; i < 100 && !ep.done(); ++i) ep.step(Action::NoAction);
  const bool ok = std::abs(ep.reward() + 1.0) <= 1e-9 && ep.health() == 0.0 && ep.done_reason() == DoneReason::Timeout &&
                  ep.step_index() == 100;
  return {ok, fmt("reward %.12f, health %g, done_reason %s after %d steps", ep.reward(), ep.health(),
                  std::string(done_reason_name(ep.done_reason())).c_str(), ep.step_index())};
}

// 3 ------------------------------------------------------------------------
Outcome health_coupling() {
  // A value-0.5 goal 0.8 ahead of the agent: untouched while idle, touched by
  // one Forwards step. Idling at t=100 costs one health point per step.
  const std::string items = fixture::agent_item(20, 20) + fixture::item("GoodGoalMulti", 20, 20.8, 0.5, 0.5, 0.5);
  Episode a(fixture::arena_from_items(items, 100), 1);
  for (int i = 0; i < 59; ++i) a.step(Action::NoAction);
  const double before_a = a.health();  // 41: the collecting step also pays 1
  a.step(Action::Forwards);
  Episode b(fixture::arena_from_items(items, 100), 1);
  for (int i = 0; i < 20; ++i) b.step(Action::NoAction);
  const double before_b = b.health();
  b.step(Action::Forwards);
  const bool ok = before_a == 41.0 && a.health() == 90.0 && before_b == 80.0 && b.health() == 100.0;
  return {ok, fmt("health %g -> %g on collection (from 40 after the step's time cost); %g -> %g clamped", before_a - 1,
                  a.health(), before_b, b.health())};
}

// 4 ------------------------------------------------------------------------
Outcome hot_zone_rate() {
  const std::string items = fixture::agent_item(20, 20) + fixture::item("HotZone", 20, 20, 6, 0, 6);
  Episode ep(fixture::arena_from_items(items, 500), 2);
  int hot_steps = 0;
  for (int i = 0; i < 50 && !ep.done(); ++i) {
    ep.step(Action::NoAction);
    hot_steps += ep.agent_hot();
  }
  const bool ok = hot_steps == 50 && std::abs(ep.reward() + 1.0) <= 1e-9;
  return {ok, fmt("%d hot steps, reward %.12f (expected -1.0)", hot_steps, ep.reward())};
}

// 5 ------------------------------------------------------------------------
Outcome death_precedence() {
  const std::string items = fixture::agent_item(20, 20) + fixture::item("HotZone", 20, 20, 6, 0, 6) +
                            fixture::item("DeathZone", 20, 20, 4, 0, 4);
  Episode untimed(fixture::arena_from_items(items, 0), 2);
  const StepResult r = untimed.step(Action::NoAction);
  Episode timed(fixture::arena_from_items(items, 500), 2);
  const StepResult rt = timed.step(Action::NoAction);
  // In a timed arena the death step still pays the ordinary time cost, not the hot one.
  const bool ok = r.done && untimed.done_reason() == DoneReason::DeathZone && untimed.reward() == -1.0 && rt.done &&
                  timed.done_reason() == DoneReason::DeathZone && std::abs(rt.reward_delta - (-1.0 - 1.0 / 500)) <= 1e-12;
  return {ok, fmt("untimed: reward %g, done %s; timed t=500: delta %.6f, done %s", untimed.reward(),
                  std::string(done_reason_name(untimed.done_reason())).c_str(), rt.reward_delta,
                  std::string(done_reason_name(timed.done_reason())).c_str())};
}

// 6 ------------------------------------------------------------------------
Outcome raycast_properties() {
  Rng rng(20240601);
  int scenes_ok = 0, rays_checked = 0, lights_ok = 0;
  double worst = 0.0;
  bool shape_ok = true, range_ok = true, column_ok = true;
  for (int s = 0; s < 1000; ++s) {
    WorldState w = fixture::random_world(rng, 8);
    const oracle::Scene scene = fixture::scene_of(w);
    const int rays = 1 + 2 * static_cast<int>(rng.below(10));
    const double fov = rng.uniform(10, 360);
    const auto m = raycast_observation(w, rays, fov);
    shape_ok &= m.size() == static_cast<std::size_t>(8 * rays) && rays % 2 == 1;
    for (double v : m) range_ok &= v >= 0.0 && v <= 1.0;
    const auto off = ray_offsets(rays, fov);
    const Entity& agent = w.agent();
    const Vec3 origin = agent.body.pose.position + Vec3{0, kRayHeight, 0};
    bool scene_ok = true;
    for (int c = 0; c < rays; ++c) {
      int nonzero = 0;
      for (int row = 0; row < 8; ++row) nonzero += m[static_cast<std::size_t>(row * rays + c)] != 0.0;
      column_ok &= nonzero <= 1;
      const Vec3 dir = forward_from_yaw(agent.body.pose.yaw + off[static_cast<std::size_t>(c)]);
      const auto hit = oracle::march_hit(scene, origin, dir, kRayMaxRange, 2e-3);
      if (!hit) {
        scene_ok = false;
        continue;
      }
      const int row = hit->id == physics::kFenceId ? 0 : static_cast<int>(ray_category(w.find(hit->id)->kind));
      const double got = m[static_cast<std::size_t>(row * rays + c)];
      const double err = std::abs((1.0 - got) * kRayMaxRange - hit->distance);
      worst = std::max(worst, err);
      scene_ok &= err <= 2e-3 + 1e-9;
      ++rays_checked;
    }
    scenes_ok += scene_ok;
    bool dark = true;
    for (double v : raycast_observation(w, rays, fov, false)) dark &= v == 0.0;
    lights_ok += dark;
  }
  const bool ok = shape_ok && range_ok && column_ok && scenes_ok == 1000 && lights_ok == 1000;
  return {ok, fmt("1000 scenes, %d rays: shape %s, range %s, <=1 hit/column %s, oracle agreement %d/1000 (worst %.2e), "
                  "lights-out zero %d/1000",
                  rays_checked, shape_ok ? "ok" : "BAD", range_ok ? "ok" : "BAD", column_ok ? "ok" : "BAD", scenes_ok,
                  worst, lights_ok)};
}

// 7 ------------------------------------------------------------------------
Outcome determinism_replay() {
  config::ArenaConfigFile file = config::load_config_file(source("configs/radial_arm_maze.yml"));
  // Untimed and without the episode-ending goal, so all 1000 actions are taken.
  auto& arena_spec = file.arenas.at(0);
  arena_spec.t = 0;
  std::erase_if(arena_spec.items, [](const config::ItemSpec& i) { return i.name == "GoodGoal"; });
  Rng actions_rng(77);
  std::vector<int> actions(1000);
  for (int& a : actions) a = static_cast<int>(actions_rng.below(kActionCount));

  Episode ep = Episode::from_config(file, 0, 4242);
  int taken = 0;
  for (int a : actions) {
    if (ep.done()) break;
    ep.step(*action_from_index(a));
    ++taken;
  }
  const std::string original = ep.trajectory().to_csv();
  const std::string again = replay(file, TrajectoryLog::from_csv(original)).to_csv();
  const bool bitwise = taken == 1000 && original == again && verify_replay(file, original).exact;

  // Over the wire: two concurrent TCP sessions with interleaved requests, plus a
  // third session sending garbage in between, must produce identical streams.
  const std::string text = config::serialize(file);
  protocol::ServeOptions opt;
  opt.port = 0;
  protocol::Server server(opt);
  std::thread loop([&] { server.run(); });
  struct Joiner {
    protocol::Server& s;
    std::thread& t;
    ~Joiner() {
      s.stop();
      t.join();
    }
  } joiner{server, loop};
  bool wire_same = true;
  bool wire_matches_local = true;
  {
    fixture::LineClient c1(server.port()), c2(server.port()), noise(server.port());
    // Session ids differ by design; every later response must match byte for byte.
    auto both = [&](const protocol::json& m) {
      c1.send_line(m.dump());
      noise.send_line("{\"seq\": 1, \"type\": \"step\", \"payload\": {\"action\": 99}}");
      c2.send_line(m.dump());
      const auto a = c1.read_line(), b = c2.read_line();
      (void)noise.read_line();
      wire_same &= a && b && (m.at("type") == "hello" || *a == *b);
      return a ? protocol::json::parse(*a) : protocol::json();
    };
    both({{"seq", 0}, {"type", "hello"}, {"payload", {{"version", protocol::kVersion}}}});
    noise.send_line("{\"seq\":0,\"type\":\"hello\",\"payload\":{\"version\":\"arena-lab/1\"}}");
    (void)noise.read_line();
    both({{"seq", 1}, {"type", "load_config"}, {"payload", {{"text", text}}}});
    both({{"seq", 2},
          {"type", "reset"},
          {"payload", {{"seed", 4242}, {"obs_spec", {{"raycast", true}, {"vector", true}}}}}});
    Episode local = Episode::from_config(config::load_config(text), 0, 4242);
    for (int i = 0; i < 1000; ++i) {
      const auto r = both({{"seq", 3 + i}, {"type", "step"}, {"payload", {{"action", actions[static_cast<std::size_t>(i)]}}}});
      local.step(*action_from_index(actions[static_cast<std::size_t>(i)]));
      wire_matches_local &= r.at("payload").at("obs").at("raycast").at("data").get<std::vector<double>>() ==
                            raycast_observation(local.world(), 15, 60);
    }
  }
  const bool ok = bitwise && wire_same && wire_matches_local;
  return {ok, fmt("1000-step log re-simulated %s; two TCP sessions %s; wire observations %s local episode",
                  bitwise ? "bitwise identical" : "DIFFERENT", wire_same ? "identical" : "DIFFER",
                  wire_matches_local ? "equal" : "DIFFER from")};
}

// 8 ------------------------------------------------------------------------
Outcome ramp_rule() {
  // Ramp rises toward -z; the agent approaches from +z holding Forwards.
  auto climb = [](double height, double length, int steps) {
    const std::string items = fixture::agent_item(20, 30, 180) + fixture::item("Ramp", 20, 20, 4, height, length);
    Episode ep(fixture::arena_from_items(items, 0), 1);
    double max_y = 0.0;
    int first = -1;
    for (int i = 0; i < steps; ++i) {
      ep.step(Action::Forwards);
      max_y = std::max(max_y, ep.world().agent().body.pose.position.y);
      if (first < 0 && max_y >= height - 1e-3) first = i + 1;
    }
    return std::pair{max_y, first};
  };
  const auto [gentle_y, gentle_step] = climb(3, 3, 200);
  const auto [steep_y, steep_step] = climb(5, 1, 500);
  const bool ok = gentle_step > 0 && steep_step < 0;
  return {ok, fmt("1:1 ramp (h 3) summit at step %d (max y %.3f); 5:1 ramp (h 5) max y %.3f in 500 steps", gentle_step,
                  gentle_y, steep_y)};
}

// 9 ------------------------------------------------------------------------
Outcome foraging_experiment() {
  const auto t0 = Clock::now();
  const std::vector<std::filesystem::path> cfg{source("configs/foraging.yml")};
  const auto heur = agents::run_evaluation(cfg, agents::AgentSpec::parse("heuristic:rays=15,fov=60"), 100, 1000);
  const auto rand = agents::run_evaluation(cfg, agents::AgentSpec::parse("random"), 100, 1000);
  const auto test = agents::rank_sum_test(heur.rewards(), rand.rewards());
  const double secs = seconds_since(t0);
  const bool ok = heur.mean() > rand.mean() && test.p_value < 1e-3 && secs < 120.0;
  return {ok, fmt("heuristic mean %.3f vs random mean %.3f; rank-sum z %.2f, p %.3g; %.1f s", heur.mean(), rand.mean(),
                  test.z, test.p_value, secs)};
}

// 10 -----------------------------------------------------------------------
Outcome button_experiment() {
  const auto t0 = Clock::now();
  const std::vector<std::filesystem::path> cfg{source("configs/curriculum/07_spawnerbutton_far_random.yml")};
  const auto heur = agents::run_evaluation(cfg, agents::AgentSpec::parse("heuristic-button"), 100, 2000);
  const auto rand = agents::run_evaluation(cfg, agents::AgentSpec::parse("random"), 100, 2000);
  const double secs = seconds_since(t0);
  const bool ok = heur.pass_rate() > rand.pass_rate() && secs < 180.0;
  return {ok, fmt("heuristic (101 rays/358 deg) pass rate %.2f vs random %.2f; %.1f s", heur.pass_rate(), rand.pass_rate(),
                  secs)};
}

// 11 -----------------------------------------------------------------------
Outcome button_sampling() {
  EntitySpec spec;
  spec.kind = EntityKind::SpawnerButton;
  spec.pose = {{20, 0, 20}, 0.0};
  spec.spawn_probability = 1.0;
  spec.reward_weights = std::array<double, 3>{1, 1, 1};
  spec.reward_spawn_position = Vec3{20, 0, 35};
  Rng rng(11);
  Entity button = build_entity(spec, 1, rng);
  std::map<EntityKind, int> counts;
  const int n = 10000;
  int presses = 0;
  for (int i = 0; i < n; ++i) {
    button.dispenser->button->cooldown_remaining = 0;
    if (auto r = press_button(button, rng)) {
      ++counts[r->kind];
      ++presses;
    }
  }
  double worst = 0.0;
  for (EntityKind k : {EntityKind::GoodGoal, EntityKind::GoodGoalMulti, EntityKind::BadGoal})
    worst = std::max(worst, std::abs(counts[k] / double(n) - 1.0 / 3.0));
  const bool ok = presses == n && counts.size() == 3 && worst <= 0.02;
  return {ok, fmt("%d presses, %d spawns: GoodGoal %d, GoodGoalMulti %d, BadGoal %d; max deviation %.4f", n, presses,
                  counts[EntityKind::GoodGoal], counts[EntityKind::GoodGoalMulti], counts[EntityKind::BadGoal], worst)};
}

// 12 -----------------------------------------------------------------------
Outcome procgen_counts() {
  Rng rng(12);
  int count_ok = 0, outputs = 0, valid = 0;
  for (int i = 0; i < 50; ++i) {
    const auto ft = fixture::fuzz_template(rng);
    const auto out = procgen::expand_template(ft.text, procgen::Exhaustive{});
    count_ok += out.size() == ft.expected_count && procgen::exhaustive_count(ft.text) == ft.expected_count;
    for (const auto& g : out) {
      ++outputs;
      const auto r = config::parse_config(g.text);
      if (r.config && !config::has_errors(r.diagnostics) && !config::has_errors(config::validate(*r.config))) ++valid;
    }
  }
  const bool ok = count_ok == 50 && valid == outputs && outputs > 0;
  return {ok, fmt("%d/50 templates expand to the Choice-cardinality product; %d/%d outputs validate", count_ok, valid,
                  outputs)};
}

// 13 -----------------------------------------------------------------------
Outcome throughput() {
  const config::ArenaConfigFile file = config::load_config_file(source("configs/foraging.yml"));
  Rng actions(13);
  int steps = 0;
  std::uint64_t seed = 0;
  double checksum = 0.0;
  const auto t0 = Clock::now();
  while (seconds_since(t0) < 2.0) {
    Episode ep = Episode::from_config(file, 0, seed++);
    while (!ep.done()) {
      ep.step(*action_from_index(static_cast<int>(actions.below(kActionCount))));
      checksum += raycast_observation(ep.world(), 15, 60)[7];
      ++steps;
    }
  }
  const double sps = steps / seconds_since(t0);

  Episode ep = Episode::from_config(file, 0, 1);
  int frames = 0;
  const auto t1 = Clock::now();
  while (seconds_since(t1) < 2.0) {
    checksum += camera_observation(ep.world(), 64).pixels[100];
    ++frames;
  }
  const double fps = frames / seconds_since(t1);
  const bool ok = sps >= 5000.0 && fps >= 300.0;
  return {ok, fmt("%.0f steps/s with 15-ray observations (target 5000); %.0f camera frames/s at 64x64 (target 300) "
                  "[checksum %.1f]",
                  sps, fps, checksum)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Appendix C golden parse", golden_parse},
      {"Timeout invariant", timeout_invariant},
      {"Health coupling", health_coupling},
      {"Hot-zone rate", hot_zone_rate},
      {"Death precedence", death_precedence},
      {"Raycast properties", raycast_properties},
      {"Determinism and replay", determinism_replay},
      {"Ramp rule", ramp_rule},
      {"Foraging experiment", foraging_experiment},
      {"Button experiment", button_experiment},
      {"Button sampling", button_sampling},
      {"Procgen expansion", procgen_counts},
      {"Throughput", throughput},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu. %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu primary criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
