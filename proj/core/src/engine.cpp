#include "teamsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace teamsim {

EpisodeHeader EngineConfig::to_header(std::string agent, std::string proxy) const {
  EpisodeHeader h;
  h.seed = seed;
  h.density = density;
  h.agent = std::move(agent);
  h.proxy = std::move(proxy);
  h.round_length_s = round_length_s;
  h.dt = dt;
  h.avatar_speed = avatar_speed;
  h.arena_radius = arena.radius;
  h.collision_radius = collision_radius;
  h.cone_half_angle_deg = cone_half_angle_deg;
  h.snapshot_hz = snapshot_hz;
  h.human_start = human_start;
  h.ai_start = ai_start;
  return h;
}

EngineConfig EngineConfig::from_header(const EpisodeHeader& h) {
  EngineConfig c;
  c.seed = h.seed;
  c.density = h.density;
  c.round_length_s = h.round_length_s;
  c.dt = h.dt;
  c.avatar_speed = h.avatar_speed;
  c.arena.radius = h.arena_radius;
  c.collision_radius = h.collision_radius;
  c.cone_half_angle_deg = h.cone_half_angle_deg;
  c.snapshot_hz = h.snapshot_hz;
  c.human_start = h.human_start;
  c.ai_start = h.ai_start;
  return c;
}

ReplayDivergence::ReplayDivergence(std::size_t index, std::string expected, std::string actual)
    : std::runtime_error("replay divergence at event " + std::to_string(index) + ": expected " +
                         (expected.empty() ? "<end of log>" : expected) + ", got " +
                         (actual.empty() ? "<end of log>" : actual)),
      index_(index),
      expected_(std::move(expected)),
      actual_(std::move(actual)) {}

int sample_target_value(Rng& rng) {
  // Inverse CDF of Beta(1,2): F(x) = 1 - (1 - x)^2.
  const double x = 1.0 - std::sqrt(1.0 - rng.uniform());
  return std::min(static_cast<int>(std::floor(16.0 * x)), kMaxTargetValue);
}

double target_value_mass(int value) {
  if (value < 0 || value > kMaxTargetValue) return 0.0;
  // Integral of 2(1 - x) over [v/16, (v+1)/16).
  return (31.0 - 2.0 * value) / 256.0;
}

World::World(const EngineConfig& config, std::string agent_name, std::string proxy_name)
    : World(config, NoFill{}) {
  log_.header = config_.to_header(std::move(agent_name), std::move(proxy_name));
  for (int i = 0; i < config_.density; ++i) spawn_target();
  log_snapshot();
}

World World::from_targets(const EngineConfig& config, const std::vector<Target>& targets) {
  World w(config, NoFill{});
  w.log_.header = w.config_.to_header("scenario", "scenario");
  for (Target t : targets) {
    t.id = w.next_id_++;
    t.state = TargetState::visible;
    t.spawn_time = 0.0;
    w.add_target(t);
  }
  w.log_snapshot();
  return w;
}

World::World(const EngineConfig& config, NoFill) : config_(config), rng_(config.seed) {
  if (config_.density <= 0) throw ConfigError("density must be positive");
  if (!(config_.round_length_s > 0.0)) throw ConfigError("round length must be positive");
  if (!(config_.dt > 0.0)) throw ConfigError("timestep must be positive");
  if (!(config_.arena.radius > 0.0)) throw ConfigError("arena radius must be positive");
  if (!(config_.avatar_speed > 0.0)) throw ConfigError("avatar speed must be positive");
  if (!(config_.min_speed_fraction > 0.0 && config_.min_speed_fraction <= config_.max_speed_fraction &&
        config_.max_speed_fraction < 1.0)) {
    throw ConfigError("target speed fractions must satisfy 0 < min <= max < 1");
  }
  total_ticks_ = std::lround(config_.round_length_s / config_.dt);
  snapshot_every_ = std::max(1L, std::lround(1.0 / (config_.snapshot_hz * config_.dt)));
  avatars_[0] = Avatar{Player::human, config_.human_start, config_.avatar_speed, {}, {}};
  avatars_[1] = Avatar{Player::ai, config_.ai_start, config_.avatar_speed, {}, {}};
  targets_.reserve(static_cast<std::size_t>(config_.density));
}

const Target* World::find_target(int id) const {
  auto it = std::lower_bound(targets_.begin(), targets_.end(), id,
                             [](const Target& t, int v) { return t.id < v; });
  return it != targets_.end() && it->id == id ? &*it : nullptr;
}

std::vector<const Target*> World::visible_targets() const {
  std::vector<const Target*> out;
  for (const auto& t : targets_) {
    if (t.visible()) out.push_back(&t);
  }
  return out;
}

int World::visible_count() const {
  return static_cast<int>(std::count_if(targets_.begin(), targets_.end(),
                                        [](const Target& t) { return t.visible(); }));
}

int World::ghost_count() const {
  return static_cast<int>(std::count_if(
      targets_.begin(), targets_.end(), [](const Target& t) { return t.state == TargetState::ghost; }));
}

const Target& World::spawn_target() {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double cone = config_.cone_half_angle_deg * std::numbers::pi / 180.0;

  // Fixed draw order: angle, heading deviation, speed, value.
  const double angle = rng_.uniform(0.0, kTwoPi);
  const double deviation = rng_.uniform(-cone, cone);
  const double speed = rng_.uniform(config_.min_speed_fraction, config_.max_speed_fraction) *
                       config_.avatar_speed;
  const int value = sample_target_value(rng_);

  const double heading = angle + std::numbers::pi + deviation;
  Target t;
  t.id = next_id_++;
  t.pos = Vec2{std::cos(angle), std::sin(angle)} * config_.arena.radius;
  t.vel = Vec2{std::cos(heading), std::sin(heading)} * speed;
  t.value = value;
  t.state = TargetState::visible;
  t.spawn_time = clock();
  add_target(t);
  return targets_.back();
}

void World::add_target(Target t) {
  total_spawned_value_ += t.value;
  targets_.push_back(t);
  log_event(SpawnEvent{t.id, t.pos, t.vel, t.value});
}

ClickStatus World::handle_click(Player player, ClickAction action) {
  Avatar& av = avatars_[index(player)];
  if (action.is_center()) {
    log_event(CenterClickEvent{player});
    av.mark.reset();
    av.nav_dest = Vec2{0.0, 0.0};
    log_event(MarkSetEvent{player, std::nullopt, *av.nav_dest, true});
    return ClickStatus::accepted;
  }

  const Target* target = find_target(*action.target_id);
  if (target == nullptr || !target->visible()) return ClickStatus::invalid_target;

  const auto sol = solve_interception(av.pos, av.speed, target->pos, target->vel, config_.arena);
  log_event(ClickEvent{player, target->id});
  av.mark = target->id;
  av.nav_dest = sol.reachable ? sol.point : clamp_to_arena(sol.point, config_.arena);
  log_event(MarkSetEvent{player, target->id, *av.nav_dest, sol.reachable});
  return ClickStatus::accepted;
}

void World::tick(double dt) {
  if (dt == 0.0) return;
  if (dt != config_.dt) throw ConfigError("tick dt must equal the configured timestep");
  tick();
}

void World::tick() {
  if (finished()) throw std::logic_error("tick past end of round");
  const double dt = config_.dt;
  ++ticks_;

  for (auto& t : targets_) t.pos += t.vel * dt;

  for (auto& av : avatars_) {
    if (!av.nav_dest) continue;
    const Vec2 to_dest = *av.nav_dest - av.pos;
    const double dist = norm(to_dest);
    const double step = av.speed * dt;
    if (dist <= step) {
      av.pos = *av.nav_dest;
    } else {
      av.pos += to_dest * (step / dist);
    }
  }

  const double reach = config_.collision_radius;
  for (auto& t : targets_) {
    if (!t.visible()) continue;
    const double dh = distance(t.pos, avatars_[0].pos);
    const double da = distance(t.pos, avatars_[1].pos);
    const bool human_hit = dh <= reach;
    const bool ai_hit = da <= reach;
    if (!human_hit && !ai_hit) continue;
    // Both in contact: nearer avatar wins, exact tie goes to the human.
    const Player winner = human_hit && (!ai_hit || dh <= da) ? Player::human : Player::ai;
    t.state = TargetState::ghost;
    scores_[index(winner)] += t.value;
    log_event(InterceptEvent{winner, t.id, t.value, t.pos});
    for (auto& av : avatars_) {
      if (av.mark == t.id) av.mark.reset();
    }
  }

  std::vector<int> exited;
  for (const auto& t : targets_) {
    if (norm(t.pos) > config_.arena.radius) exited.push_back(t.id);
  }
  for (int id : exited) {
    auto it = std::find_if(targets_.begin(), targets_.end(), [id](const Target& t) { return t.id == id; });
    const bool was_visible = it->visible();
    if (was_visible) exited_visible_value_ += it->value;
    log_event(ExitEvent{id, was_visible});
    for (auto& av : avatars_) {
      if (av.mark == id) av.mark.reset();
    }
    targets_.erase(it);
    spawn_target();
  }

  if (ticks_ % snapshot_every_ == 0) log_snapshot();
  if (finished()) log_event(RoundEndEvent{scores_[0], scores_[1]});
}

void World::log_snapshot() { log_event(SnapshotEvent{avatars_[0].pos, avatars_[1].pos}); }

World replay(const EpisodeLog& recorded) {
  World world(EngineConfig::from_header(recorded.header), recorded.header.agent,
              recorded.header.proxy);

  const auto& events = recorded.events;
  const bool complete = !events.empty() && events.back().as<RoundEndEvent>() != nullptr;
  const double last_t = events.empty() ? 0.0 : events.back().t;

  auto first_mismatch = [&]() -> void {
    const auto& produced = world.log().events;
    const std::size_t n = std::min(produced.size(), events.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto a = serialize_event(events[i]);
      auto b = serialize_event(produced[i]);
      if (a != b) throw ReplayDivergence(i, std::move(a), std::move(b));
    }
    if (produced.size() != events.size()) {
      throw ReplayDivergence(n, n < events.size() ? serialize_event(events[n]) : std::string{},
                             n < produced.size() ? serialize_event(produced[n]) : std::string{});
    }
  };

  std::size_t cursor = 0;
  auto next_click = [&]() -> const Event* {
    while (cursor < events.size()) {
      const Event& e = events[cursor];
      if (e.as<ClickEvent>() || e.as<CenterClickEvent>()) return &e;
      ++cursor;
    }
    return nullptr;
  };

  while (!world.finished()) {
    for (const Event* e = next_click(); e != nullptr && e->t <= world.clock(); e = next_click()) {
      if (e->t < world.clock()) first_mismatch();
      ClickStatus status;
      if (const auto* c = e->as<ClickEvent>()) {
        status = world.handle_click(c->player, ClickAction::target(c->target_id));
      } else {
        status = world.handle_click(e->as<CenterClickEvent>()->player, ClickAction::center());
      }
      if (status != ClickStatus::accepted) first_mismatch();
      ++cursor;
    }
    if (!complete && world.clock() >= last_t) break;
    world.tick();
  }
  first_mismatch();
  return world;
}

}  // namespace teamsim
