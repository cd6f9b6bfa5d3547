#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsim/geometry.hpp"

namespace teamsim {

enum class Player { human, ai };

std::string_view to_string(Player p);
Player player_from_string(std::string_view s);
constexpr Player other(Player p) { return p == Player::human ? Player::ai : Player::human; }

struct SpawnEvent {
  int target_id = 0;
  Vec2 pos;
  Vec2 vel;
  int value = 0;
};

struct ClickEvent {
  Player player = Player::human;
  int target_id = 0;
};

struct CenterClickEvent {
  Player player = Player::human;
};

// target_id is empty when the destination is the center point.
struct MarkSetEvent {
  Player player = Player::human;
  std::optional<int> target_id;
  Vec2 dest;
  bool reachable = true;
};

struct InterceptEvent {
  Player player = Player::human;
  int target_id = 0;
  int value = 0;
  Vec2 pos;
};

struct ExitEvent {
  int target_id = 0;
  bool was_visible = false;
};

struct SnapshotEvent {
  Vec2 human_pos;
  Vec2 ai_pos;
};

struct RoundEndEvent {
  int human_score = 0;
  int ai_score = 0;
};

using EventPayload = std::variant<SpawnEvent, ClickEvent, CenterClickEvent, MarkSetEvent,
                                  InterceptEvent, ExitEvent, SnapshotEvent, RoundEndEvent>;

struct Event {
  double t = 0.0;
  EventPayload payload;

  template <typename T>
  const T* as() const { return std::get_if<T>(&payload); }
};

std::string_view event_kind(const Event& e);

inline constexpr int kEpisodeFormatVersion = 1;

// Everything needed to re-simulate a round from scratch.
struct EpisodeHeader {
  int format_version = kEpisodeFormatVersion;
  std::uint64_t seed = 0;
  int density = 5;
  std::string agent;  // agent kind name, or empty
  std::string proxy;  // human proxy name, or "live"
  double round_length_s = 180.0;
  double dt = 0.02;
  double avatar_speed = 200.0;
  double arena_radius = 400.0;
  double collision_radius = 14.0;
  double cone_half_angle_deg = 60.0;
  double snapshot_hz = 5.0;
  Vec2 human_start{-100.0, 0.0};
  Vec2 ai_start{100.0, 0.0};
};

struct EpisodeLog {
  EpisodeHeader header;
  std::vector<Event> events;

  // False for rounds cut short by a disconnect (no round_end event).
  bool complete() const;
};

class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const EpisodeHeader& h);
EpisodeHeader header_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

// One JSON object per line: header first, then events in time order.
std::string serialize_event(const Event& e);
void write_jsonl(std::ostream& out, const EpisodeLog& log);
void save_log(const std::filesystem::path& path, const EpisodeLog& log);
EpisodeLog read_jsonl(std::istream& in);
EpisodeLog load_log(const std::filesystem::path& path);

}  // namespace teamsim
