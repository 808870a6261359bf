#include "arena/agents.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "arena/observations.hpp"

namespace arena::agents {

namespace {

bool is_finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw AgentError("bad number for " + what + ": '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw AgentError("bad integer for " + what + ": '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::vector<int> parse_rows(const std::string& s, const std::string& what) {
  std::vector<int> rows;
  for (const auto& part : split(s, '/'))
    if (!part.empty()) rows.push_back(parse_int(part, what));
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

// ---- random policy ----

int draw_duration(const DurationDistribution& d, Rng& rng) {
  return std::visit(
      [&](const auto& dist) -> int {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, FixedDuration>) {
          return dist.steps;
        } else if constexpr (std::is_same_v<T, NormalDuration>) {
          const double x = std::max(1.0, rng.normal(dist.mean, dist.sd));
          return static_cast<int>(std::min(std::round(x), 1e9));
        } else {
          if (dist.p >= 1.0) return 1;
          double u = rng.uniform();
          while (u <= 0.0) u = rng.uniform();
          const double n = std::ceil(std::log(u) / std::log1p(-dist.p));
          return static_cast<int>(std::clamp(n, 1.0, 1e9));
        }
      },
      d);
}

void RandomPolicyParams::validate() const {
  double total = 0.0;
  for (double w : action_weights) {
    if (!is_finite_nonneg(w)) throw AgentError("action weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw AgentError("action weights must not all be zero");
  if (!(correlation >= 0.0 && correlation <= 1.0)) throw AgentError("correlation must lie in [0,1]");
  std::visit(
      [](const auto& dist) {
        using T = std::decay_t<decltype(dist)>;
        if constexpr (std::is_same_v<T, FixedDuration>) {
          if (dist.steps < 1) throw AgentError("fixed duration must be >= 1");
        } else if constexpr (std::is_same_v<T, NormalDuration>) {
          if (!std::isfinite(dist.mean) || !is_finite_nonneg(dist.sd))
            throw AgentError("normal duration needs a finite mean and sd >= 0");
        } else {
          if (!(dist.p > 0.0 && dist.p <= 1.0)) throw AgentError("geometric duration needs p in (0,1]");
        }
      },
      duration);
}

Action random_policy_step(const RandomPolicyParams& params, Rng& rng, RandomMemory& memory) {
  if (memory.current && memory.remaining > 0) {
    --memory.remaining;
    return *memory.current;
  }
  const bool keep = memory.current && params.correlation > 0.0 && rng.bernoulli(params.correlation);
  if (!keep) {
    const double total = std::accumulate(params.action_weights.begin(), params.action_weights.end(), 0.0);
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int pick = kActionCount - 1;
    while (pick > 0 && params.action_weights[static_cast<std::size_t>(pick)] == 0.0) --pick;
    for (int i = 0; i < kActionCount; ++i) {
      const double w = params.action_weights[static_cast<std::size_t>(i)];
      if (w == 0.0) continue;
      acc += w;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    memory.current = static_cast<Action>(pick);
  }
  memory.remaining = draw_duration(params.duration, rng) - 1;
  return *memory.current;
}

// ---- heuristic policy ----

void HeuristicPolicyParams::validate() const {
  if (ray_count < 1 || ray_count % 2 == 0) throw AgentError("ray_count must be odd and positive");
  if (!(fov_degrees > 0.0 && fov_degrees <= 360.0)) throw AgentError("fov must lie in (0,360]");
  if (target_rows.empty()) throw AgentError("target_rows must not be empty");
  for (const auto* rows : {&target_rows, &followup_rows})
    for (int r : *rows)
      if (r < 0 || r >= kRayCategoryCount) throw AgentError("target row out of range");
  if (!(stuck_speed_epsilon > 0.0)) throw AgentError("stuck epsilon must be > 0");
  if (stuck_window < 1 || unstick_duration < 1 || explore_hold < 1)
    throw AgentError("stuck window, unstick duration and explore hold must be >= 1");
  if (!(turn_burst_chance >= 0.0 && turn_burst_chance <= 1.0)) throw AgentError("turn burst chance must lie in [0,1]");
}

HeuristicPolicyParams HeuristicPolicyParams::foraging() { return {}; }

HeuristicPolicyParams HeuristicPolicyParams::button() {
  HeuristicPolicyParams p;
  p.ray_count = 101;
  p.fov_degrees = 358.0;
  p.target_rows = {static_cast<int>(RayCategory::Button)};
  p.followup_rows = {static_cast<int>(RayCategory::GoodGoal)};
  p.exploration = Exploration::ForwardsBackwards;
  return p;
}

namespace {

// Turns needed for a quarter turn at the fixed turn rate.
constexpr int kQuarterTurnSteps = 15;

constexpr Action kMovementActions[] = {Action::Forwards,  Action::ForwardsLeft,  Action::ForwardsRight,
                                       Action::Backwards, Action::BackwardsLeft, Action::BackwardsRight};

// Column holding the largest entry over the given rows, or -1.
int best_column(const std::vector<double>& raycast, int rays, const std::vector<int>& rows) {
  int col = -1;
  double best = 0.0;
  for (int c = 0; c < rays; ++c)
    for (int r : rows) {
      const double v = raycast[static_cast<std::size_t>(r * rays + c)];
      if (v > best) {
        best = v;
        col = c;
      }
    }
  return col;
}

}  // namespace

Action heuristic_policy_step(const HeuristicPolicyParams& params, const std::vector<double>& raycast,
                             const std::array<double, 7>& vector_obs, Rng& rng, HeuristicMemory& memory) {
  const int rays = params.ray_count;
  if (raycast.size() != static_cast<std::size_t>(kRayCategoryCount * rays))
    throw AgentError("raycast has " + std::to_string(raycast.size()) + " entries, expected " +
                     std::to_string(kRayCategoryCount * rays));

  const double speed = std::hypot(vector_obs[1], vector_obs[2], vector_obs[3]);
  memory.slow_steps = speed < params.stuck_speed_epsilon ? memory.slow_steps + 1 : 0;

  if (memory.unstick_remaining > 0) {
    --memory.unstick_remaining;
    return memory.unstick_action;
  }
  if (memory.slow_steps >= params.stuck_window) {
    memory.slow_steps = 0;
    memory.burst_remaining = 0;
    memory.hold_remaining = 0;
    memory.unstick_action = rng.bernoulli(0.5) ? Action::ForwardsLeft : Action::ForwardsRight;
    memory.unstick_remaining = params.unstick_duration - 1;
    return memory.unstick_action;
  }

  if (!memory.followup && !params.followup_rows.empty() && best_column(raycast, rays, params.followup_rows) >= 0)
    memory.followup = true;
  const auto& rows = memory.followup ? params.followup_rows : params.target_rows;
  const int col = best_column(raycast, rays, rows);
  if (col >= 0) {
    memory.burst_remaining = 0;
    memory.hold_remaining = 0;
    const int centre = rays / 2;
    if (col < centre) return Action::ForwardsLeft;
    if (col > centre) return Action::ForwardsRight;
    return Action::Forwards;
  }

  if (params.exploration == Exploration::TurnBursts) {
    if (memory.burst_remaining > 0) {
      --memory.burst_remaining;
      return memory.burst_action;
    }
    if (rng.bernoulli(params.turn_burst_chance)) {
      memory.burst_action = rng.bernoulli(0.5) ? Action::Left : Action::Right;
      memory.burst_remaining = kQuarterTurnSteps - 1;
      return memory.burst_action;
    }
    return Action::Forwards;
  }
  if (memory.hold_remaining > 0) {
    --memory.hold_remaining;
    return memory.hold_action;
  }
  memory.hold_action = kMovementActions[rng.below(std::size(kMovementActions))];
  memory.hold_remaining = params.explore_hold - 1;
  return memory.hold_action;
}

// ---- harness ----

AgentSpec AgentSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string base = text.substr(0, colon);
  AgentSpec spec;
  spec.name = text;
  if (base == "random") {
    spec.params = RandomPolicyParams{};
  } else if (base == "heuristic") {
    spec.params = HeuristicPolicyParams::foraging();
  } else if (base == "heuristic-button") {
    spec.params = HeuristicPolicyParams::button();
  } else {
    throw AgentError("unknown agent '" + base + "' (expected random, heuristic or heuristic-button)");
  }
  if (colon != std::string::npos) {
    for (const auto& kv : split(text.substr(colon + 1), ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw AgentError("expected key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (auto* r = std::get_if<RandomPolicyParams>(&spec.params)) {
        if (key == "weights") {
          const auto parts = split(value, '/');
          if (parts.size() != kActionCount) throw AgentError("weights needs 9 values separated by '/'");
          for (std::size_t i = 0; i < parts.size(); ++i) r->action_weights[i] = parse_double(parts[i], key);
        } else if (key == "duration") {
          // fixed/N, normal/MEAN/SD, geometric/P
          const auto parts = split(value, '/');
          if (parts.size() == 2 && parts[0] == "fixed")
            r->duration = FixedDuration{parse_int(parts[1], key)};
          else if (parts.size() == 3 && parts[0] == "normal")
            r->duration = NormalDuration{parse_double(parts[1], key), parse_double(parts[2], key)};
          else if (parts.size() == 2 && parts[0] == "geometric")
            r->duration = GeometricDuration{parse_double(parts[1], key)};
          else
            throw AgentError("duration must be fixed/N, normal/MEAN/SD or geometric/P");
        } else if (key == "correlation") {
          r->correlation = parse_double(value, key);
        } else {
          throw AgentError("unknown random agent option '" + key + "'");
        }
      } else {
        auto& h = std::get<HeuristicPolicyParams>(spec.params);
        if (key == "rays") h.ray_count = parse_int(value, key);
        else if (key == "fov") h.fov_degrees = parse_double(value, key);
        else if (key == "targets") h.target_rows = parse_rows(value, key);
        else if (key == "followup") h.followup_rows = parse_rows(value, key);
        else if (key == "epsilon") h.stuck_speed_epsilon = parse_double(value, key);
        else if (key == "window") h.stuck_window = parse_int(value, key);
        else if (key == "unstick") h.unstick_duration = parse_int(value, key);
        else if (key == "explore") {
          if (value == "turns") h.exploration = Exploration::TurnBursts;
          else if (value == "forwards-backwards") h.exploration = Exploration::ForwardsBackwards;
          else throw AgentError("explore must be turns or forwards-backwards");
        } else {
          throw AgentError("unknown heuristic agent option '" + key + "'");
        }
      }
    }
  }
  std::visit([](const auto& p) { p.validate(); }, spec.params);
  return spec;
}

std::uint64_t policy_seed(std::uint64_t episode_seed) {
  // splitmix64 finaliser: decorrelates the policy stream from the arena stream.
  std::uint64_t z = episode_seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Agent::Agent(const AgentSpec& spec, std::uint64_t seed) : spec_(spec), rng_(policy_seed(seed)) {}

Action Agent::act(const Episode& episode) {
  if (const auto* r = std::get_if<RandomPolicyParams>(&spec_.params)) return random_policy_step(*r, rng_, random_);
  const auto& h = std::get<HeuristicPolicyParams>(spec_.params);
  const auto rays = raycast_observation(episode.world(), h.ray_count, h.fov_degrees, episode.lights_on());
  const auto vec = vector_observation(episode.world(), episode.health());
  return heuristic_policy_step(h, rays, vec, rng_, heuristic_);
}

double EvaluationReport::mean() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rows) s += r.reward;
  return s / static_cast<double>(rows.size());
}

double EvaluationReport::median() const {
  auto v = rewards();
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double EvaluationReport::pass_rate() const {
  if (rows.empty()) return 0.0;
  const auto passed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.passed; });
  return static_cast<double>(passed) / static_cast<double>(rows.size());
}

std::vector<double> EvaluationReport::rewards() const {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.reward);
  return v;
}

std::string EvaluationReport::to_csv() const {
  std::string out = "# arena-lab " + version_string() + "\n";
  out += kHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.config + ',' + std::to_string(r.episode) + ',' + std::to_string(r.seed) + ',' + format_double(r.reward) +
           ',' + (r.passed ? "1" : "0") + ',' + std::to_string(r.steps) + ',' + r.done_reason + '\n';
  }
  return out;
}

EvaluationReport EvaluationReport::from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  EvaluationReport rep;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kHeader) throw std::runtime_error("unexpected report header: " + line);
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) throw std::runtime_error("report row needs 7 fields: " + line);
    EvaluationRow r;
    r.config = f[0];
    r.episode = parse_int(f[1], "episode");
    r.seed = std::stoull(f[2]);
    r.reward = parse_double(f[3], "reward");
    r.passed = f[4] == "1";
    r.steps = parse_int(f[5], "steps");
    r.done_reason = f[6];
    rep.rows.push_back(std::move(r));
  }
  if (!header) throw std::runtime_error("report has no header");
  return rep;
}

EvaluationReport run_evaluation(const std::vector<std::filesystem::path>& configs, const AgentSpec& agent,
                                int episodes, std::uint64_t base_seed, const EvaluationOptions& options) {
  if (episodes < 0) throw AgentError("episode count must be >= 0");
  std::visit([](const auto& p) { p.validate(); }, agent.params);

  std::vector<config::ArenaConfigFile> files;
  for (const auto& path : configs) files.push_back(config::load_config_file(path.string()));
  if (options.trajectory_dir) std::filesystem::create_directories(*options.trajectory_dir);

  const std::size_t total = configs.size() * static_cast<std::size_t>(episodes);
  EvaluationReport report;
  report.rows.resize(total);

  auto run_one = [&](std::size_t job) {
    const std::size_t ci = job / static_cast<std::size_t>(episodes);
    const int ep_index = static_cast<int>(job % static_cast<std::size_t>(episodes));
    EvaluationRow& row = report.rows[job];
    row.config = configs[ci].filename().string();
    row.episode = ep_index;
    row.seed = base_seed + static_cast<std::uint64_t>(ep_index);
    try {
      const auto& file = files[ci];
      auto it = file.arenas.begin();
      std::advance(it, ep_index % static_cast<int>(file.arenas.size()));
      Episode ep = Episode::from_config(file, it->first, row.seed, options.physics);
      Agent policy(agent, row.seed);
      while (!ep.done()) {
        if (ep.step_index() >= options.max_steps) {
          ep.skip();
          break;
        }
        ep.step(policy.act(ep));
      }
      const EpisodeSummary s = ep.finish();
      row.reward = s.final_reward;
      row.passed = s.passed;
      row.steps = s.steps;
      row.done_reason = std::string(done_reason_name(s.reason));
      if (options.trajectory_dir) {
        char name[64];
        std::snprintf(name, sizeof name, "_ep%04d.csv", ep_index);
        std::ofstream out(*options.trajectory_dir / (configs[ci].stem().string() + name));
        out << s.trajectory.to_csv();
        if (!out) throw std::runtime_error("cannot write trajectory log");
      }
    } catch (const std::exception& e) {
      row.done_reason = "error";
      row.error = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(std::max<std::size_t>(total, 1))));
  if (workers == 1) {
    for (std::size_t j = 0; j < total; ++j) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < total; j = next++) run_one(j);
      });
    for (auto& t : pool) t.join();
  }
  return report;
}

// ---- rank-sum test ----

namespace {

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace

RankSumResult rank_sum_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw AgentError("rank-sum test needs two non-empty samples");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.push_back({v, 0});
  for (double v : b) pooled.push_back({v, 1});
  std::sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  // Twice the midranks, so ties stay integral.
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const long r2 = static_cast<long>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) rank2[k] = r2;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  long obs2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (pooled[i].second == 0) obs2 += rank2[i];

  RankSumResult res;
  res.rank_sum = obs2 / 2.0;
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb), dn = static_cast<double>(n);
  res.u = res.rank_sum - dna * (dna + 1) / 2;
  const double mu = dna * dnb / 2;
  const double var = dna * dnb / 12.0 * ((dn + 1) - tie_term / (dn * (dn - 1)));
  res.z = var > 0 ? (res.u - mu) / std::sqrt(var) : 0.0;

  if (na <= 20 && nb <= 20) {
    // Exact null: count size-na subsets of the pooled ranks by their doubled rank sum.
    const long max_sum = std::accumulate(rank2.begin(), rank2.end(), 0L);
    std::vector<std::vector<double>> count(na + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    count[0][0] = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = std::min(i + 1, na); k >= 1; --k)
        for (long s = max_sum; s >= rank2[i]; --s) count[k][static_cast<std::size_t>(s)] += count[k - 1][static_cast<std::size_t>(s - rank2[i])];
    const double centre2 = dna * (dn + 1);  // expected doubled rank sum
    const double dev = std::abs(static_cast<double>(obs2) - centre2);
    double extreme = 0.0, all = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      const double c = count[na][static_cast<std::size_t>(s)];
      all += c;
      if (std::abs(static_cast<double>(s) - centre2) >= dev - 1e-9) extreme += c;
    }
    res.p_value = std::min(1.0, extreme / all);
    res.exact = true;
  } else if (var > 0) {
    const double zc = std::max(0.0, std::abs(res.u - mu) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, normal_two_sided(zc));
  } else {
    res.p_value = 1.0;
  }
  return res;
}

RankSumResult compare_agents(const EvaluationReport& a, const EvaluationReport& b) {
  return rank_sum_test(a.rewards(), b.rewards());
}

}  // namespace arena::agents
