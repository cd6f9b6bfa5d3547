#include "teamsim/episode_log.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace teamsim {

using nlohmann::json;

std::string_view to_string(Player p) { return p == Player::human ? "human" : "ai"; }

Player player_from_string(std::string_view s) {
  if (s == "human") return Player::human;
  if (s == "ai") return Player::ai;
  throw LogFormatError("unknown player '" + std::string(s) + "'");
}

namespace {

json point(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 point_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw LogFormatError("expected [x, y] point");
  return {j[0].get<double>(), j[1].get<double>()};
}

struct KindName {
  std::string_view operator()(const SpawnEvent&) const { return "spawn"; }
  std::string_view operator()(const ClickEvent&) const { return "click"; }
  std::string_view operator()(const CenterClickEvent&) const { return "center_click"; }
  std::string_view operator()(const MarkSetEvent&) const { return "mark_set"; }
  std::string_view operator()(const InterceptEvent&) const { return "intercept"; }
  std::string_view operator()(const ExitEvent&) const { return "exit"; }
  std::string_view operator()(const SnapshotEvent&) const { return "snapshot"; }
  std::string_view operator()(const RoundEndEvent&) const { return "round_end"; }
};

struct PayloadWriter {
  json& j;
  void operator()(const SpawnEvent& e) const {
    j["target_id"] = e.target_id;
    j["pos"] = point(e.pos);
    j["vel"] = point(e.vel);
    j["value"] = e.value;
  }
  void operator()(const ClickEvent& e) const {
    j["player"] = to_string(e.player);
    j["target_id"] = e.target_id;
  }
  void operator()(const CenterClickEvent& e) const { j["player"] = to_string(e.player); }
  void operator()(const MarkSetEvent& e) const {
    j["player"] = to_string(e.player);
    j["target_id"] = e.target_id ? json(*e.target_id) : json(nullptr);
    j["dest"] = point(e.dest);
    j["reachable"] = e.reachable;
  }
  void operator()(const InterceptEvent& e) const {
    j["player"] = to_string(e.player);
    j["target_id"] = e.target_id;
    j["value"] = e.value;
    j["pos"] = point(e.pos);
  }
  void operator()(const ExitEvent& e) const {
    j["target_id"] = e.target_id;
    j["was_visible"] = e.was_visible;
  }
  void operator()(const SnapshotEvent& e) const {
    j["human_pos"] = point(e.human_pos);
    j["ai_pos"] = point(e.ai_pos);
  }
  void operator()(const RoundEndEvent& e) const {
    j["human_score"] = e.human_score;
    j["ai_score"] = e.ai_score;
  }
};

}  // namespace

std::string_view event_kind(const Event& e) { return std::visit(KindName{}, e.payload); }

json to_json(const EpisodeHeader& h) {
  return json{
      {"format", "teamsim-episode"},
      {"format_version", h.format_version},
      {"seed", h.seed},
      {"density", h.density},
      {"agent", h.agent},
      {"proxy", h.proxy},
      {"round_length_s", h.round_length_s},
      {"dt", h.dt},
      {"avatar_speed", h.avatar_speed},
      {"arena_radius", h.arena_radius},
      {"collision_radius", h.collision_radius},
      {"cone_half_angle_deg", h.cone_half_angle_deg},
      {"snapshot_hz", h.snapshot_hz},
      {"human_start", point(h.human_start)},
      {"ai_start", point(h.ai_start)},
  };
}

EpisodeHeader header_from_json(const json& j) {
  try {
    if (j.value("format", "") != "teamsim-episode") {
      throw LogFormatError("not an episode log header");
    }
    EpisodeHeader h;
    h.format_version = j.at("format_version").get<int>();
    if (h.format_version != kEpisodeFormatVersion) {
      throw LogFormatError("unsupported episode format version " +
                           std::to_string(h.format_version));
    }
    h.seed = j.at("seed").get<std::uint64_t>();
    h.density = j.at("density").get<int>();
    h.agent = j.at("agent").get<std::string>();
    h.proxy = j.at("proxy").get<std::string>();
    h.round_length_s = j.at("round_length_s").get<double>();
    h.dt = j.at("dt").get<double>();
    h.avatar_speed = j.at("avatar_speed").get<double>();
    h.arena_radius = j.at("arena_radius").get<double>();
    h.collision_radius = j.at("collision_radius").get<double>();
    h.cone_half_angle_deg = j.at("cone_half_angle_deg").get<double>();
    h.snapshot_hz = j.at("snapshot_hz").get<double>();
    h.human_start = point_from(j.at("human_start"));
    h.ai_start = point_from(j.at("ai_start"));
    return h;
  } catch (const json::exception& ex) {
    throw LogFormatError(std::string("bad episode header: ") + ex.what());
  }
}

json to_json(const Event& e) {
  json j;
  j["t"] = e.t;
  j["kind"] = event_kind(e);
  std::visit(PayloadWriter{j}, e.payload);
  return j;
}

Event event_from_json(const json& j) {
  try {
    Event e;
    e.t = j.at("t").get<double>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "spawn") {
      e.payload = SpawnEvent{j.at("target_id").get<int>(), point_from(j.at("pos")),
                             point_from(j.at("vel")), j.at("value").get<int>()};
    } else if (kind == "click") {
      e.payload = ClickEvent{player_from_string(j.at("player").get<std::string>()),
                             j.at("target_id").get<int>()};
    } else if (kind == "center_click") {
      e.payload = CenterClickEvent{player_from_string(j.at("player").get<std::string>())};
    } else if (kind == "mark_set") {
      MarkSetEvent m;
      m.player = player_from_string(j.at("player").get<std::string>());
      if (!j.at("target_id").is_null()) m.target_id = j.at("target_id").get<int>();
      m.dest = point_from(j.at("dest"));
      m.reachable = j.at("reachable").get<bool>();
      e.payload = m;
    } else if (kind == "intercept") {
      e.payload = InterceptEvent{player_from_string(j.at("player").get<std::string>()),
                                 j.at("target_id").get<int>(), j.at("value").get<int>(),
                                 point_from(j.at("pos"))};
    } else if (kind == "exit") {
      e.payload = ExitEvent{j.at("target_id").get<int>(), j.at("was_visible").get<bool>()};
    } else if (kind == "snapshot") {
      e.payload = SnapshotEvent{point_from(j.at("human_pos")), point_from(j.at("ai_pos"))};
    } else if (kind == "round_end") {
      e.payload = RoundEndEvent{j.at("human_score").get<int>(), j.at("ai_score").get<int>()};
    } else {
      throw LogFormatError("unknown event kind '" + kind + "'");
    }
    return e;
  } catch (const json::exception& ex) {
    throw LogFormatError(std::string("bad event: ") + ex.what());
  }
}

std::string serialize_event(const Event& e) { return to_json(e).dump(); }

void write_jsonl(std::ostream& out, const EpisodeLog& log) {
  out << to_json(log.header).dump() << '\n';
  for (const auto& e : log.events) {
    out << serialize_event(e) << '\n';
  }
}

void save_log(const std::filesystem::path& path, const EpisodeLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_jsonl(out, log);
}

EpisodeLog read_jsonl(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& ex) {
      throw LogFormatError("line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (!have_header) {
      log.header = header_from_json(j);
      have_header = true;
      continue;
    }
    log.events.push_back(event_from_json(j));
    if (log.events.size() > 1 && log.events.back().t < log.events[log.events.size() - 2].t) {
      throw LogFormatError("line " + std::to_string(line_no) + ": events out of time order");
    }
  }
  if (!have_header) throw LogFormatError("empty episode log");
  return log;
}

bool EpisodeLog::complete() const {
  return !events.empty() && events.back().as<RoundEndEvent>() != nullptr;
}

EpisodeLog load_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_jsonl(in);
}

}  // namespace teamsim
