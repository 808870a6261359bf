// arena_lab: operator entry point.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "arena/agents.hpp"
#include "arena/config.hpp"
#include "arena/episode.hpp"
#include "arena/observations.hpp"
#include "arena/procgen.hpp"
#include "arena/protocol.hpp"
#include "arena/run_config.hpp"

namespace fs = std::filesystem;
using namespace arena;

namespace {

protocol::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

// Prints located diagnostics before failing.
config::ArenaConfigFile load_or_report(const std::string& path) {
  try {
    return config::load_config_file(path);
  } catch (const config::ConfigError& e) {
    for (const auto& d : e.diagnostics) std::cerr << config::format_diagnostic(d, path) << "\n";
    throw std::runtime_error("invalid config '" + path + "'");
  }
}

struct Globals {
  std::string run_config_path;
  std::optional<std::uint64_t> seed;
  RunConfig run;

  void load() {
    if (!run_config_path.empty()) run = load_run_config(run_config_path);
  }
  std::uint64_t resolved_seed() const { return resolve_seed(seed, run.seed, std::getenv(kSeedEnvVar)); }
};

int cmd_validate(const std::vector<std::string>& paths) {
  bool failed = false;
  for (const auto& path : paths) {
    std::string text;
    try {
      text = slurp(path);
    } catch (const std::exception& e) {
      std::cerr << path << ":0:0: error: " << e.what() << "\n";
      failed = true;
      continue;
    }
    auto parsed = config::parse_config(text);
    config::Diagnostics diags = parsed.diagnostics;
    if (parsed.config && !config::has_errors(diags)) {
      const auto more = config::validate(*parsed.config);
      diags.insert(diags.end(), more.begin(), more.end());
    }
    for (const auto& d : diags) std::cerr << config::format_diagnostic(d, path) << "\n";
    if (config::has_errors(diags) || !parsed.config) failed = true;
    else std::cout << path << ": ok\n";
  }
  return failed ? 1 : 0;
}

int cmd_serve(const Globals& g, const std::string& host, int port, const std::string& play_dir) {
  protocol::ServeOptions opt;
  opt.host = host.empty() ? g.run.host : host;
  opt.port = port < 0 ? g.run.port : port;
  opt.physics = g.run.physics;
  if (!play_dir.empty()) {
    if (!fs::is_directory(play_dir)) throw std::runtime_error("--play directory '" + play_dir + "' not found");
    opt.static_dir = play_dir;
  }
  protocol::Server server(opt);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "arena-lab " << version_string() << " " << protocol::kVersion << " listening on " << opt.host << ":"
            << server.port() << std::endl;
  server.run();
  g_server = nullptr;
  return 0;
}

int cmd_eval(const Globals& g, std::vector<std::string> configs, const std::string& agent_text, int episodes,
             int workers, const std::string& out_dir) {
  const agents::AgentSpec spec = agents::AgentSpec::parse(agent_text);
  if (episodes < 1) throw std::runtime_error("--episodes must be at least 1");
  const std::uint64_t seed = g.resolved_seed();
  const fs::path out = out_dir.empty() ? fs::path(g.run.log_dir) : fs::path(out_dir);
  agents::EvaluationOptions opt;
  opt.workers = workers;
  opt.physics = g.run.physics;
  opt.trajectory_dir = out / "trajectories";
  std::vector<fs::path> paths(configs.begin(), configs.end());
  const auto report = agents::run_evaluation(paths, spec, episodes, seed, opt);

  spit(out / "report.csv", report.to_csv());
  std::ostringstream summary;
  summary << "arena-lab " << version_string() << " agent=" << spec.name << " episodes=" << report.rows.size()
          << " seed=" << seed << " mean=" << config::format_number(report.mean())
          << " median=" << config::format_number(report.median())
          << " pass_rate=" << config::format_number(report.pass_rate());
  spit(out / "summary.txt", summary.str() + "\n");
  std::cout << summary.str() << std::endl;

  int errors = 0;
  for (const auto& row : report.rows)
    if (!row.error.empty()) {
      ++errors;
      std::cerr << row.config << " episode " << row.episode << ": " << row.error << "\n";
    }
  return errors ? 1 : 0;
}

int cmd_procgen(const Globals& g, const std::string& template_path, bool exhaustive, int sample, const std::string& out,
                std::string stem) {
  const std::string text = slurp(template_path);
  if (exhaustive == (sample > 0)) throw std::runtime_error("choose exactly one of --exhaustive or --sample N");
  procgen::ExpansionMode mode = procgen::Exhaustive{};
  if (!exhaustive) mode = procgen::Sample{sample, g.resolved_seed()};
  if (stem.empty()) stem = fs::path(template_path).stem().string();
  const auto configs = procgen::expand_template(text, mode);
  const auto manifest = procgen::write_battery(configs, out, stem);
  std::cout << "wrote " << manifest.files.size() << " configs and manifest.csv to " << out << std::endl;
  return 0;
}

int cmd_replay(const Globals& g, const std::string& config_path, const std::string& log_path) {
  const auto file = load_or_report(config_path);
  const auto verdict = verify_replay(file, slurp(log_path), g.run.physics);
  if (verdict.exact) {
    std::cout << "exact" << std::endl;
    return 0;
  }
  if (!verdict.message.empty()) std::cout << verdict.message << std::endl;
  else if (verdict.first_divergent_step) std::cout << "mismatch at step " << *verdict.first_divergent_step << std::endl;
  else std::cout << "mismatch" << std::endl;
  return 1;
}

int cmd_render(const Globals& g, const std::string& config_path, int arena, int steps, const std::string& actions,
               int size, bool grayscale, const std::string& out) {
  const auto file = load_or_report(config_path);
  const std::uint64_t seed = g.resolved_seed();
  Episode ep = Episode::from_config(file, arena, seed, g.run.physics);
  std::vector<Action> plan;
  for (char c : actions) {
    if (c == ',' || c == ' ') continue;
    const auto a = action_from_index(c - '0');
    if (!a) throw std::runtime_error(std::string("bad action '") + c + "' in --actions");
    plan.push_back(*a);
  }
  for (int i = 0; i < steps && !ep.done(); ++i) ep.step(Action::NoAction);
  for (Action a : plan) {
    if (ep.done()) break;
    ep.step(a);
  }
  const Image img = camera_observation(ep.world(), size, grayscale, ep.lights_on());
  write_png(img, out,
            {{"Software", "arena-lab " + version_string()},
             {"Seed", std::to_string(seed)},
             {"Arena", std::to_string(arena)},
             {"Step", std::to_string(ep.step_index())}});
  std::cout << "wrote " << out << " (" << img.width << "x" << img.height << ", step " << ep.step_index() << ", seed "
            << seed << ")" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arena-lab: headless arena simulator, evaluator and server"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Globals g;
  bool dump_defaults = false;
  bool show_version = false;
  app.add_flag("--dump-defaults", dump_defaults, "Print the default run configuration and exit");
  app.add_option("--run-config", g.run_config_path, "Run configuration YAML (physics, server, log dir, seed)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Base seed (default: run config, then $ARENA_LAB_SEED, then 0)");
  app.add_flag("--version", show_version, "Print the build version and exit");

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Check configuration files");
  validate->add_option("paths", validate_paths, "Config files")->required();

  std::string host;
  int port = -1;
  std::string play_dir;
  auto* serve = app.add_subcommand("serve", "Run the protocol server");
  serve->add_option("--host", host, "Listen address (default from run config)");
  serve->add_option("--port", port, "Listen port; 0 picks a free port (default from run config)");
  serve->add_option("--play", play_dir, "Serve static play-client assets from this directory");

  std::vector<std::string> eval_configs;
  std::string agent_text;
  int episodes = 100;
  int workers = 1;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a baseline agent");
  std::string eval_config;
  eval->add_option("config", eval_config, "Arena config file")->required();
  eval->add_option("agent", agent_text, "Agent spec, e.g. random or heuristic:rays=15,fov=60")->required();
  eval->add_option("--also", eval_configs, "Further config files evaluated with the same agent and seeds");
  eval->add_option("--episodes,-n", episodes, "Episodes per config")->capture_default_str();
  eval->add_option("--workers,-j", workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--out,-o", eval_out, "Output directory (default: run config log_dir)");

  std::string template_path;
  bool exhaustive = false;
  int sample = 0;
  std::string procgen_out = "battery";
  std::string stem;
  auto* gen = app.add_subcommand("procgen", "Expand a config template into a battery");
  gen->add_option("template", template_path, "Template file")->required();
  gen->add_flag("--exhaustive", exhaustive, "Enumerate every combination of finite directives");
  gen->add_option("--sample", sample, "Draw N seeded samples")->check(CLI::PositiveNumber);
  gen->add_option("--out,-o", procgen_out, "Output directory")->capture_default_str();
  gen->add_option("--stem", stem, "File name stem (default: template stem)");

  std::string replay_config, replay_log;
  auto* replay = app.add_subcommand("replay", "Re-simulate a trajectory log and compare");
  replay->add_option("config", replay_config, "Config the log was recorded on")->required();
  replay->add_option("log", replay_log, "Trajectory CSV")->required();

  std::string render_config, render_out = "frame.png", render_actions;
  int render_arena = 0, render_steps = 0, render_size = 256;
  bool render_gray = false;
  auto* render = app.add_subcommand("render-frame", "Export a camera frame as PNG");
  render->add_option("config", render_config, "Arena config")->required();
  render->add_option("--arena", render_arena, "Arena index")->capture_default_str();
  render->add_option("--steps", render_steps, "NoAction steps before capture")->capture_default_str();
  render->add_option("--actions", render_actions, "Action digits (0-8) applied after --steps");
  render->add_option("--size", render_size, "Square resolution")->capture_default_str();
  render->add_flag("--grayscale", render_gray, "Single channel output");
  render->add_option("--out,-o", render_out, "PNG path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (show_version) {
      std::cout << "arena-lab " << version_string() << " (" << protocol::kVersion << ")\n";
      return 0;
    }
    g.load();
    if (dump_defaults) {
      std::cout << dump_run_config(g.run);
      return 0;
    }
    if (*validate) return cmd_validate(validate_paths);
    if (*serve) return cmd_serve(g, host, port, play_dir);
    if (*eval) {
      eval_configs.insert(eval_configs.begin(), eval_config);
      return cmd_eval(g, eval_configs, agent_text, episodes, workers, eval_out);
    }
    if (*gen) return cmd_procgen(g, template_path, exhaustive, sample, procgen_out, stem);
    if (*replay) return cmd_replay(g, replay_config, replay_log);
    if (*render) return cmd_render(g, render_config, render_arena, render_steps, render_actions, render_size,
                                   render_gray, render_out);
    std::cerr << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
