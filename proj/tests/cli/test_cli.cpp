#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" ARENA_LAB_BIN "\" " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string cfg(const std::string& name) { return std::string("\"") + ARENA_SOURCE_DIR + "/configs/" + name + "\""; }

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("arena_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("validate exit codes and diagnostics") {
  const auto d = scratch("validate");
  CHECK(run("validate " + cfg("radial_arm_maze.yml")).code == 0);
  std::ofstream(d / "bad.yml") << "!ArenaConfig\narenas:\n  0: !Arena\n    items:\n    - !Item\n      name: Wall\n"
                                  "      positions:\n      - !Vector3 {x: 45, y: 0, z: 10}\n";
  const Run bad = run("validate " + q(d / "bad.yml"));
  CHECK(bad.code == 1);
  CHECK(bad.out.find("bad.yml:8:") != std::string::npos);

  const Run mixed = run("validate " + cfg("foraging.yml") + " " + q(d / "bad.yml") + " " + cfg("button_press.yml"));
  CHECK(mixed.code == 1);
  // Good files carry no diagnostics, only an ok line.
  const std::size_t first = mixed.out.find("foraging.yml:");
  CHECK(mixed.out.compare(first, 17, "foraging.yml: ok\n") == 0);
  CHECK(mixed.out.find("foraging.yml:", first + 1) == std::string::npos);
  CHECK(run("validate " + q(d / "missing.yml")).code != 0);
}

TEST_CASE("every bundled config validates") {
  std::string all;
  for (const auto& e : fs::recursive_directory_iterator(fs::path(ARENA_SOURCE_DIR) / "configs"))
    if (e.path().extension() == ".yml") all += q(e.path()) + " ";
  const Run r = run("validate " + all);
  INFO(r.out);
  CHECK(r.code == 0);
}

TEST_CASE("eval writes deterministic artifacts") {
  const auto a = scratch("eval_a"), b = scratch("eval_b");
  const Run r1 = run("eval " + cfg("foraging.yml") + " random --episodes 5 --seed 1 -o " + q(a));
  REQUIRE(r1.code == 0);
  CHECK(r1.out.find("seed=1") != std::string::npos);
  CHECK(run("eval " + cfg("foraging.yml") + " random --episodes 5 --seed 1 --workers 3 -o " + q(b)).code == 0);
  const std::string report = slurp(a / "report.csv");
  CHECK(report == slurp(b / "report.csv"));
  CHECK(report.rfind("# arena-lab ", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 2 + 5);
  for (int i = 0; i < 5; ++i) {
    const std::string name = "foraging_ep000" + std::to_string(i) + ".csv";
    CHECK(slurp(a / "trajectories" / name) == slurp(b / "trajectories" / name));
    CHECK(slurp(a / "trajectories" / name).find("seed=" + std::to_string(1 + i)) != std::string::npos);
  }
  CHECK(slurp(a / "summary.txt").find("pass_rate=") != std::string::npos);
}

TEST_CASE("seed comes from the environment when no flag is given") {
  const auto a = scratch("eval_env");
  CHECK(run("eval " + cfg("foraging.yml") + " random --episodes 1 -o " + q(a), "ARENA_LAB_SEED=77").code == 0);
  CHECK(slurp(a / "report.csv").find(",77,") != std::string::npos);
  CHECK(run("eval " + cfg("foraging.yml") + " random --episodes 1 -o " + q(a), "ARENA_LAB_SEED=x").code != 0);
}

TEST_CASE("eval errors exit nonzero") {
  const auto d = scratch("eval_err");
  CHECK(run("eval " + cfg("foraging.yml") + " nonsense -o " + q(d)).code != 0);
  CHECK(run("eval " + cfg("nope.yml") + " random -o " + q(d)).code != 0);
  CHECK(run("eval " + cfg("foraging.yml") + " random --episodes 0 -o " + q(d)).code != 0);
}

TEST_CASE("replay verdicts") {
  const auto d = scratch("replay");
  REQUIRE(run("eval " + cfg("radial_arm_maze.yml") + " heuristic --episodes 1 --seed 4 -o " + q(d)).code == 0);
  const fs::path log = d / "trajectories" / "radial_arm_maze_ep0000.csv";
  const Run ok = run("replay " + cfg("radial_arm_maze.yml") + " " + q(log));
  CHECK(ok.code == 0);
  CHECK(ok.out == "exact\n");

  // Edit the reward cell on the fifth data row.
  std::string text = slurp(log);
  std::size_t pos = 0;
  for (int i = 0; i < 2 + 4; ++i) pos = text.find('\n', pos) + 1;
  const std::size_t eol = text.find('\n', pos);
  std::string row = text.substr(pos, eol - pos);
  const std::size_t cut = row.rfind(',', row.rfind(',') - 1);
  row = row.substr(0, cut) + ",123" + row.substr(row.rfind(','));
  text.replace(pos, eol - pos, row);
  std::ofstream(d / "edited.csv") << text;
  const Run bad = run("replay " + cfg("radial_arm_maze.yml") + " " + q(d / "edited.csv"));
  CHECK(bad.code == 1);
  CHECK(bad.out.find("mismatch at step 5") != std::string::npos);

  std::ofstream(d / "trunc.csv") << text.substr(0, 30);
  CHECK(run("replay " + cfg("radial_arm_maze.yml") + " " + q(d / "trunc.csv")).code != 0);

  // Different physics constants diverge.
  std::ofstream(d / "run.yml") << "physics:\n  move_impulse: 0.16\n";
  const Run phys = run("--run-config " + q(d / "run.yml") + " replay " + cfg("radial_arm_maze.yml") + " " + q(log));
  CHECK(phys.code == 1);
  CHECK(phys.out.find("mismatch at step") != std::string::npos);
}

TEST_CASE("procgen battery") {
  const auto d = scratch("procgen");
  const std::string tmpl = std::string("\"") + ARENA_SOURCE_DIR + "/templates/foraging_variants.yml\"";
  CHECK(run("procgen " + tmpl + " --exhaustive -o " + q(d)).code == 0);
  int ymls = 0;
  for (const auto& e : fs::directory_iterator(d)) ymls += e.path().extension() == ".yml";
  CHECK(ymls == 12);
  CHECK(run("validate " + q(d / "foraging_variants_011.yml")).code == 0);
  CHECK(slurp(d / "foraging_variants_000.yml").rfind("# arena-lab ", 0) == 0);
  CHECK(run("procgen " + tmpl + " -o " + q(d)).code != 0);  // mode required
  CHECK(run("procgen " + tmpl + " --exhaustive --sample 3 -o " + q(d)).code != 0);

  const auto s1 = scratch("procgen_s1"), s2 = scratch("procgen_s2");
  const std::string arm = std::string("\"") + ARENA_SOURCE_DIR + "/templates/coloured_arm.yml\"";
  CHECK(run("procgen " + arm + " --sample 4 --seed 9 -o " + q(s1)).code == 0);
  CHECK(run("procgen " + arm + " --sample 4 -o " + q(s2), "ARENA_LAB_SEED=9").code == 0);
  CHECK(slurp(s1 / "manifest.csv") == slurp(s2 / "manifest.csv"));
  CHECK(run("procgen " + arm + " --exhaustive -o " + q(s1)).code != 0);  // infinite directive
}

TEST_CASE("render-frame writes a tagged png") {
  const auto d = scratch("render");
  const Run r = run("render-frame " + cfg("radial_arm_maze.yml") + " --seed 3 --size 48 --actions 1,1,2 -o " + q(d / "f.png"));
  REQUIRE(r.code == 0);
  const std::string png = slurp(d / "f.png");
  CHECK(png.rfind("\x89PNG", 0) == 0);
  CHECK(png.find(std::string("Seed\0" "3", 6)) != std::string::npos);
  CHECK(png.find("arena-lab ") != std::string::npos);
  CHECK(run("render-frame " + cfg("radial_arm_maze.yml") + " --actions 9 -o " + q(d / "g.png")).code != 0);
  CHECK(run("render-frame " + cfg("radial_arm_maze.yml") + " --arena 4 -o " + q(d / "g.png")).code != 0);
  CHECK(run("render-frame " + cfg("radial_arm_maze.yml") + " --size 2 -o " + q(d / "g.png")).code != 0);
}

TEST_CASE("defaults, run config and serve failures") {
  const Run dump = run("--dump-defaults");
  CHECK(dump.code == 0);
  CHECK(dump.out.find("gravity: 0.02") != std::string::npos);
  const auto d = scratch("runcfg");
  std::ofstream(d / "bad.yml") << "nonsense: 1\n";
  CHECK(run("--run-config " + q(d / "bad.yml") + " --dump-defaults").code != 0);
  CHECK(run("serve --host not-an-ip --port 0").code != 0);
  CHECK(run("serve --port 0 --play " + q(d / "missing")).code != 0);
  CHECK(run("frobnicate").code != 0);
}
