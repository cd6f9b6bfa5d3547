#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamsim/episode_log.hpp"
#include "teamsim/geometry.hpp"
#include "teamsim/rng.hpp"

namespace teamsim {

struct EngineConfig {
  int density = 5;
  std::uint64_t seed = 0;
  double round_length_s = 180.0;
  double avatar_speed = 200.0;
  Arena arena{400.0};
  double dt = 0.02;
  // Avatar half-width 8 px plus target radius 6 px.
  double collision_radius = 14.0;
  double cone_half_angle_deg = 60.0;
  double min_speed_fraction = 0.50;
  double max_speed_fraction = 0.99;
  double snapshot_hz = 5.0;
  Vec2 human_start{-100.0, 0.0};
  Vec2 ai_start{100.0, 0.0};

  EpisodeHeader to_header(std::string agent, std::string proxy) const;
  static EngineConfig from_header(const EpisodeHeader& h);
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ReplayDivergence : public std::runtime_error {
 public:
  ReplayDivergence(std::size_t index, std::string expected, std::string actual);

  std::size_t index() const { return index_; }
  const std::string& expected() const { return expected_; }
  const std::string& actual() const { return actual_; }

 private:
  std::size_t index_;
  std::string expected_;
  std::string actual_;
};

enum class TargetState { visible, ghost, exited };

struct Target {
  int id = 0;
  Vec2 pos;
  Vec2 vel;
  int value = 0;
  TargetState state = TargetState::visible;
  double spawn_time = 0.0;

  bool visible() const { return state == TargetState::visible; }
  Vec2 position_at(double elapsed) const { return pos + vel * elapsed; }
};

struct Avatar {
  Player owner = Player::human;
  Vec2 pos;
  double speed = 200.0;
  std::optional<int> mark;
  std::optional<Vec2> nav_dest;

  bool arrived() const { return nav_dest && pos == *nav_dest; }
};

// Either a target id or the center point.
struct ClickAction {
  std::optional<int> target_id;

  static ClickAction center() { return {}; }
  static ClickAction target(int id) { return {id}; }
  bool is_center() const { return !target_id.has_value(); }
};

enum class ClickStatus { accepted, invalid_target };

// Point-value distribution: Beta(1,2) discretized into 16 equal-width bins.
inline constexpr int kMaxTargetValue = 15;
int sample_target_value(Rng& rng);
double target_value_mass(int value);

// One round of the interception game. Single-threaded; callers queue inputs and
// apply them between ticks.
class World {
 public:
  explicit World(const EngineConfig& config, std::string agent_name = {},
                 std::string proxy_name = {});

  // Hand-built scenario: the given targets replace the random initial fill
  // (ids are reassigned 0..n-1 in order). Later respawns are random as usual.
  // The resulting log cannot be replayed from its header.
  static World from_targets(const EngineConfig& config, const std::vector<Target>& targets);

  const EngineConfig& config() const { return config_; }
  const Arena& arena() const { return config_.arena; }
  double clock() const { return static_cast<double>(ticks_) * config_.dt; }
  long ticks() const { return ticks_; }
  long total_ticks() const { return total_ticks_; }
  bool finished() const { return ticks_ >= total_ticks_; }

  // Visible and ghost targets, ordered by id.
  const std::vector<Target>& targets() const { return targets_; }
  const Target* find_target(int id) const;
  std::vector<const Target*> visible_targets() const;
  int visible_count() const;
  int ghost_count() const;

  const Avatar& avatar(Player p) const { return avatars_[index(p)]; }
  int score(Player p) const { return scores_[index(p)]; }
  int total_spawned_value() const { return total_spawned_value_; }
  int exited_visible_value() const { return exited_visible_value_; }
  int spawned_count() const { return next_id_; }

  ClickStatus handle_click(Player player, ClickAction action);

  // Advance one fixed timestep. tick(0) is a no-op; any other dt must equal
  // the configured step.
  void tick();
  void tick(double dt);

  const EpisodeLog& log() const { return log_; }

 private:
  static constexpr std::size_t index(Player p) { return p == Player::human ? 0 : 1; }
  struct NoFill {};
  World(const EngineConfig& config, NoFill);
  const Target& spawn_target();
  void add_target(Target t);
  void log_event(EventPayload payload) { log_.events.push_back({clock(), std::move(payload)}); }
  void log_snapshot();

  EngineConfig config_;
  Rng rng_;
  long ticks_ = 0;
  long total_ticks_ = 0;
  long snapshot_every_ = 10;
  int next_id_ = 0;
  std::vector<Target> targets_;
  std::array<Avatar, 2> avatars_;
  std::array<int, 2> scores_{0, 0};
  int total_spawned_value_ = 0;
  int exited_visible_value_ = 0;
  EpisodeLog log_;
};

// Re-simulate a recorded round, injecting its clicks at their recorded times.
// Throws ReplayDivergence naming the first event that differs.
World replay(const EpisodeLog& log);

}  // namespace teamsim
