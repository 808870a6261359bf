#include "arena/episode.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace arena {

namespace {

constexpr std::array<std::string_view, kActionCount> kActionNames{
    "NoAction", "Forwards", "Left", "Right", "ForwardsLeft", "ForwardsRight", "Backwards", "BackwardsLeft",
    "BackwardsRight"};

constexpr std::array<std::string_view, 7> kReasonNames{"none",    "goal",        "bad_goal", "death_zone",
                                                      "timeout", "health_zero", "user_skip"};

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_num(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error("malformed number '" + std::string(s) + "' in trajectory");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = line.find(sep, start);
    out.push_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

std::string row_text(const TrajectoryRow& r) {
  std::string s = std::to_string(r.step);
  for (double v : {r.position.x, r.position.y, r.position.z, r.yaw}) s += "," + num(v);
  s += "," + std::to_string(action_index(r.action));
  for (double v : {r.reward_delta, r.reward, r.health}) s += "," + num(v);
  return s;
}

DoneReason ending_reason(EntityKind k) {
  switch (k) {
    case EntityKind::DeathZone:
      return DoneReason::DeathZone;
    case EntityKind::BadGoal:
    case EntityKind::BadGoalBounce:
      return DoneReason::BadGoal;
    default:
      return DoneReason::Goal;
  }
}

}  // namespace

std::string_view action_name(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<Action> action_from_index(int index) {
  if (index < 0 || index >= kActionCount) return std::nullopt;
  return static_cast<Action>(index);
}

int action_turn(Action a) {
  switch (a) {
    case Action::Left:
    case Action::ForwardsLeft:
    case Action::BackwardsLeft:
      return -1;
    case Action::Right:
    case Action::ForwardsRight:
    case Action::BackwardsRight:
      return 1;
    default:
      return 0;
  }
}

int action_move(Action a) {
  switch (a) {
    case Action::Forwards:
    case Action::ForwardsLeft:
    case Action::ForwardsRight:
      return 1;
    case Action::Backwards:
    case Action::BackwardsLeft:
    case Action::BackwardsRight:
      return -1;
    default:
      return 0;
  }
}

std::string_view done_reason_name(DoneReason r) { return kReasonNames[static_cast<std::size_t>(r)]; }

std::optional<DoneReason> done_reason_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i)
    if (kReasonNames[i] == name) return static_cast<DoneReason>(i);
  return std::nullopt;
}

bool lights_state(int step, const std::vector<int>& blackouts) {
  if (blackouts.empty()) return true;
  if (blackouts.size() == 1 && blackouts[0] < 0) {
    const int n = -blackouts[0];
    return (step / n) % 2 == 0;
  }
  for (std::size_t i = 0; i < blackouts.size(); i += 2) {
    const int start = blackouts[i];
    const bool open_ended = i + 1 >= blackouts.size();
    if (step >= start && (open_ended || step < blackouts[i + 1])) return false;
  }
  return true;
}

std::string version_string() { return ARENA_LAB_VERSION; }

// ---------------------------------------------------------------------------
// Trajectory log

std::string TrajectoryLog::to_csv() const {
  std::string s = "# arena-lab " + version + " seed=" + std::to_string(seed) +
                  " arena=" + std::to_string(arena_index) + "\n";
  s += kHeader;
  s += "\n";
  for (const auto& r : rows) s += row_text(r) + "\n";
  return s;
}

TrajectoryLog TrajectoryLog::from_csv(std::string_view text) {
  TrajectoryLog log;
  std::vector<std::string_view> lines;
  for (auto l : split(text, '\n'))
    if (!l.empty()) lines.push_back(l.back() == '\r' ? l.substr(0, l.size() - 1) : l);
  if (lines.size() < 2) throw std::runtime_error("trajectory is truncated: missing preamble or header");

  std::istringstream pre{std::string(lines[0])};
  std::string hash, tool, token;
  pre >> hash >> tool >> log.version;
  if (hash != "#" || tool != "arena-lab") throw std::runtime_error("trajectory preamble not recognised");
  bool have_seed = false;
  while (pre >> token) {
    if (token.rfind("seed=", 0) == 0) {
      log.seed = std::stoull(token.substr(5));
      have_seed = true;
    } else if (token.rfind("arena=", 0) == 0) {
      log.arena_index = std::stoi(token.substr(6));
    }
  }
  if (!have_seed) throw std::runtime_error("trajectory preamble has no seed");
  if (lines[1] != kHeader) throw std::runtime_error("trajectory header mismatch");

  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto f = split(lines[i], ',');
    if (f.size() != 9)
      throw std::runtime_error("trajectory row " + std::to_string(i - 1) + " has " + std::to_string(f.size()) +
                               " fields, expected 9");
    TrajectoryRow r;
    r.step = static_cast<int>(parse_num(f[0]));
    r.position = {parse_num(f[1]), parse_num(f[2]), parse_num(f[3])};
    r.yaw = parse_num(f[4]);
    auto a = action_from_index(static_cast<int>(parse_num(f[5])));
    if (!a) throw std::runtime_error("trajectory row " + std::to_string(i - 1) + " has a bad action");
    r.action = *a;
    r.reward_delta = parse_num(f[6]);
    r.reward = parse_num(f[7]);
    r.health = parse_num(f[8]);
    if (r.step != static_cast<int>(log.rows.size()) + 1)
      throw std::runtime_error("trajectory rows are not contiguous at step " + std::to_string(r.step));
    log.rows.push_back(r);
  }
  return log;
}

std::vector<Action> TrajectoryLog::actions() const {
  std::vector<Action> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.action);
  return out;
}

// ---------------------------------------------------------------------------
// Episode

Episode::Episode(const config::ArenaSpec& spec, std::uint64_t seed, const physics::PhysicsParams& params,
                 int arena_index)
    : world_(instantiate_arena(spec, seed, params)),
      seed_(seed),
      arena_index_(arena_index),
      t_(spec.t),
      pass_mark_(spec.pass_mark),
      blackouts_(spec.blackouts) {
  frozen_remaining_ = world_.agent().frozen_delay;
  log_.version = version_string();
  log_.seed = seed;
  log_.arena_index = arena_index;
}

Episode Episode::from_config(const config::ArenaConfigFile& file, int arena_index, std::uint64_t seed,
                             const physics::PhysicsParams& params) {
  auto it = file.arenas.find(arena_index);
  if (it == file.arenas.end())
    throw std::out_of_range("arena index " + std::to_string(arena_index) + " not in config (" +
                            std::to_string(file.arenas.size()) + " arenas)");
  return Episode(it->second, seed, params, arena_index);
}

void Episode::add_health(double delta) { health_ = std::clamp(health_ + delta, 0.0, kMaxHealth); }

StepResult Episode::step(Action action) {
  if (done()) throw EpisodeError("step called on a finished episode");
  const physics::PhysicsParams& params = world_.params;
  const bool frozen = frozen_remaining_ > 0;

  auto bodies = rigid_bodies(world_);
  std::vector<Vec3> impulses(bodies.size());
  std::size_t agent_index = 0;
  while (bodies[agent_index].id != world_.agent_id) ++agent_index;
  if (frozen) {
    --frozen_remaining_;
  } else {
    Pose& pose = bodies[agent_index].body.pose;
    pose.yaw = normalize_yaw(pose.yaw + action_turn(action) * params.turn_degrees);
    impulses[agent_index] = forward_from_yaw(pose.yaw) * (action_move(action) * params.move_impulse);
  }
  const auto contacts = physics::step(bodies, impulses, params);
  write_back(world_, bodies);

  // Entities tick in ascending id; spawns land after every tick so the order is fixed.
  std::vector<SpawnRequest> spawns;
  const OccupancyQuery occupancy = [this](const physics::Body& b, const physics::Collider& c, EntityId self) {
    return first_overlap(world_, b, c, self).has_value();
  };
  for (Entity& e : world_.entities) {
    auto out = tick_entity(e, step_ + 1, world_.rng, occupancy);
    spawns.insert(spawns.end(), out.begin(), out.end());
  }
  for (const auto& s : spawns) realize_spawn(world_, s);

  // Agent contacts: one outcome per touching entity, ascending id.
  std::map<EntityId, Vec3> touching;  // entity -> normal pointing toward the agent
  for (const auto& c : contacts) {
    if (c.a == world_.agent_id && c.b >= 0) touching.emplace(c.b, c.normal);
    else if (c.b == world_.agent_id && c.a >= 0) touching.emplace(c.a, c.normal * -1.0);
  }
  bool hot = false, death = false;
  DoneReason ending = DoneReason::None;
  std::vector<double> contact_rewards;
  std::vector<EntityId> consumed;
  std::vector<SpawnRequest> presses;
  for (const auto& [id, normal] : touching) {
    Entity* e = world_.find(id);
    if (!e) continue;
    if (e->kind == EntityKind::SpawnerButton && is_button_face_contact(*e, normal)) {
      if (auto r = press_button(*e, world_.rng)) presses.push_back(*r);
      continue;
    }
    const ContactOutcome o = on_agent_contact(*e);
    hot = hot || o.hot;
    death = death || o.death;
    if (o.reward_delta != 0.0) contact_rewards.push_back(o.reward_delta);
    if (o.consume_entity) consumed.push_back(id);
    if (o.ends_episode && ending == DoneReason::None) ending = ending_reason(e->kind);
  }
  if (death) ending = DoneReason::DeathZone;
  for (EntityId id : consumed) remove_entity(world_, id);
  for (const auto& s : presses) realize_spawn(world_, s);
  hot_ = hot && !death;

  double delta = 0.0;
  if (!frozen && t_ > 0) {
    const double rate = hot_ ? 10.0 : 1.0;
    delta -= rate / t_;
    add_health(-rate * kMaxHealth / t_);
  }
  for (double r : contact_rewards) {
    delta += r;
    add_health(r * kMaxHealth);
  }
  reward_ += delta;
  ++step_;

  if (ending != DoneReason::None) reason_ = ending;
  else if (t_ > 0 && step_ >= t_) reason_ = DoneReason::Timeout;
  else if (health_ <= 0.0) reason_ = DoneReason::HealthZero;

  const Entity& agent = world_.agent();
  TrajectoryRow row;
  row.step = step_;
  row.position = agent.body.pose.position;
  row.yaw = agent.body.pose.yaw;
  row.action = action;
  row.reward_delta = delta;
  row.reward = reward_;
  row.health = health_;
  log_.rows.push_back(row);

  StepResult r;
  r.reward_delta = delta;
  r.done = done();
  r.reason = reason_;
  r.step = step_;
  r.health = health_;
  r.position = agent.body.pose.position;
  r.velocity = agent.body.velocity;
  return r;
}

void Episode::skip() {
  if (done()) throw EpisodeError("skip called on a finished episode");
  reason_ = DoneReason::UserSkip;
}

EpisodeSummary Episode::finish() const {
  if (!done()) throw EpisodeError("finish called before the episode ended");
  EpisodeSummary s;
  s.final_reward = reward_;
  s.pass_mark = pass_mark_;
  s.passed = reward_ >= pass_mark_;
  s.steps = step_;
  s.reason = reason_;
  s.trajectory = log_;
  return s;
}

TrajectoryLog replay(const config::ArenaConfigFile& file, const TrajectoryLog& log,
                     const physics::PhysicsParams& params) {
  Episode ep = Episode::from_config(file, log.arena_index, log.seed, params);
  for (Action a : log.actions()) {
    if (ep.done()) break;
    ep.step(a);
  }
  return ep.trajectory();
}

ReplayVerdict verify_replay(const config::ArenaConfigFile& file, std::string_view csv,
                            const physics::PhysicsParams& params) {
  ReplayVerdict v;
  const TrajectoryLog log = TrajectoryLog::from_csv(csv);
  if (log.version != version_string()) {
    v.message = "version mismatch: log " + log.version + ", build " + version_string();
    return v;
  }
  const TrajectoryLog again = replay(file, log, params);
  const std::size_t n = std::max(log.rows.size(), again.rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool have_a = i < log.rows.size(), have_b = i < again.rows.size();
    if (!have_a || !have_b || row_text(log.rows[i]) != row_text(again.rows[i])) {
      v.first_divergent_step = static_cast<int>(i) + 1;
      v.message = "mismatch at step " + std::to_string(i + 1);
      if (have_a && have_b)
        v.message += ": logged " + row_text(log.rows[i]) + " vs simulated " + row_text(again.rows[i]);
      return v;
    }
  }
  v.exact = again.to_csv() == std::string(csv) || again.to_csv() == log.to_csv();
  v.message = v.exact ? "exact" : "mismatch in preamble";
  return v;
}

}  // namespace arena
