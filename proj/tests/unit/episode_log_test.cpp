#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "teamsim/episode_runner.hpp"

using namespace teamsim;

namespace {

EpisodeLog sample_log() {
  EpisodeSpec spec;
  spec.engine.density = 5;
  spec.engine.seed = 12345678901234567890ull;
  spec.engine.round_length_s = 20.0;
  spec.agent = AgentKind::divide;
  EpisodeRunner runner(spec);
  return runner.run_to_end();
}

std::string dump(const EpisodeLog& log) {
  std::ostringstream ss;
  write_jsonl(ss, log);
  return ss.str();
}

}  // namespace

TEST(EpisodeLog, RoundTripIsByteExact) {
  const auto log = sample_log();
  const auto text = dump(log);
  std::istringstream in(text);
  const auto back = read_jsonl(in);
  EXPECT_EQ(dump(back), text);
  EXPECT_EQ(back.header.seed, 12345678901234567890ull);
  EXPECT_EQ(back.header.agent, "divide");
  EXPECT_EQ(back.header.proxy, "greedy");
  EXPECT_TRUE(back.complete());
}

TEST(EpisodeLog, HeaderLineThenSnakeCaseEvents) {
  const auto text = dump(sample_log());
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  EXPECT_EQ(header.at("format"), "teamsim-episode");
  EXPECT_EQ(header.at("format_version"), 1);
  for (const char* key : {"seed", "density", "agent", "round_length_s", "dt", "avatar_speed", "arena_radius",
                          "collision_radius", "cone_half_angle_deg", "snapshot_hz"}) {
    EXPECT_TRUE(header.contains(key)) << key;
  }
  std::set<std::string> kinds;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    const auto e = nlohmann::json::parse(line);
    ASSERT_TRUE(e.contains("t"));
    ASSERT_TRUE(e.contains("kind"));
    EXPECT_GE(e["t"].get<double>(), last_t);
    last_t = e["t"].get<double>();
    kinds.insert(e["kind"].get<std::string>());
  }
  for (const char* k : {"spawn", "click", "mark_set", "intercept", "exit", "snapshot", "round_end"}) {
    EXPECT_TRUE(kinds.count(k)) << k;
  }
}

TEST(EpisodeLog, FloatsKeepFullPrecision) {
  EpisodeLog log;
  log.events.push_back({0.1 + 0.2, SnapshotEvent{{1.0 / 3.0, -2.0 / 7.0}, {1e-300, 123456.789012345678}}});
  std::istringstream in(dump(log));
  const auto back = read_jsonl(in);
  const auto* s = back.events[0].as<SnapshotEvent>();
  EXPECT_EQ(back.events[0].t, 0.1 + 0.2);
  EXPECT_EQ(s->human_pos, (Vec2{1.0 / 3.0, -2.0 / 7.0}));
  EXPECT_EQ(s->ai_pos, (Vec2{1e-300, 123456.789012345678}));
}

TEST(EpisodeLog, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_jsonl(in);
  };
  EXPECT_THROW(parse(""), LogFormatError);
  EXPECT_THROW(parse("{\"format\":\"other\"}\n"), LogFormatError);
  const auto header = dump(EpisodeLog{});
  EXPECT_THROW(parse(header + "{\"t\":0,\"kind\":\"teleport\"}\n"), LogFormatError);
  EXPECT_THROW(parse(header + "not json\n"), LogFormatError);
  EXPECT_THROW(parse(header + "{\"t\":1,\"kind\":\"exit\",\"target_id\":1,\"was_visible\":true}\n"
                              "{\"t\":0.5,\"kind\":\"exit\",\"target_id\":2,\"was_visible\":true}\n"),
               LogFormatError);
  auto bumped = header;
  bumped.replace(bumped.find("\"format_version\":1"), 18, "\"format_version\":9");
  EXPECT_THROW(parse(bumped), LogFormatError);
}

TEST(EpisodeLog, SaveAndLoadFile) {
  const auto log = sample_log();
  const auto path = std::filesystem::temp_directory_path() / "teamsim_episode_log_test.jsonl";
  save_log(path, log);
  EXPECT_EQ(dump(load_log(path)), dump(log));
  std::filesystem::remove(path);
  EXPECT_THROW(load_log(path), std::exception);
}
