#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "teamsim/episode_runner.hpp"
#include "teamsim/metrics.hpp"

using namespace teamsim;

namespace {

struct LogBuilder {
  EpisodeLog log;

  LogBuilder& spawn(double t, int id, int value) {
    log.events.push_back({t, SpawnEvent{id, {}, {}, value}});
    return *this;
  }
  LogBuilder& mark(double t, Player p, std::optional<int> id) {
    log.events.push_back({t, MarkSetEvent{p, id, {}, true}});
    return *this;
  }
  LogBuilder& intercept(double t, Player p, int id, int value) {
    log.events.push_back({t, InterceptEvent{p, id, value, {}}});
    return *this;
  }
  LogBuilder& exit(double t, int id) {
    log.events.push_back({t, ExitEvent{id, true}});
    return *this;
  }
  LogBuilder& snap(double t, Vec2 h, Vec2 a) {
    log.events.push_back({t, SnapshotEvent{h, a}});
    return *this;
  }
};

}  // namespace

TEST(RelativeScores, ThirtyOfHundred) {
  LogBuilder b;
  b.spawn(0, 0, 30).spawn(0, 1, 70).intercept(1, Player::human, 0, 30);
  auto r = relative_scores(b.log);
  EXPECT_DOUBLE_EQ(r.human, 0.30);
  EXPECT_DOUBLE_EQ(r.ai, 0.0);
  EXPECT_DOUBLE_EQ(r.team, 0.30);
}

TEST(RelativeScores, NobodyScores) {
  LogBuilder b;
  b.spawn(0, 0, 5).spawn(0, 1, 3);
  const auto r = relative_scores(b.log);
  EXPECT_EQ(r.human, 0.0);
  EXPECT_EQ(r.ai, 0.0);
  EXPECT_EQ(r.team, 0.0);
}

TEST(RelativeScores, EmptyRoundRejected) {
  LogBuilder b;
  EXPECT_THROW(relative_scores(b.log), MetricsError);
  b.spawn(0, 0, 0);
  EXPECT_THROW(relative_scores(b.log), MetricsError);
}

TEST(Steals, MarkActiveAtInterception) {
  LogBuilder b;
  b.spawn(0, 7, 5).mark(1, Player::human, 7).mark(2, Player::ai, 7).intercept(3, Player::ai, 7, 5);
  EXPECT_EQ(count_steals(b.log, Player::ai), 1);
  EXPECT_EQ(count_steals(b.log, Player::human), 0);
}

TEST(Steals, VictimSwitchedAwayAfterThiefMarked) {
  // human marked 7, AI marked 7 while that mark was live, human moved on
  LogBuilder b;
  b.spawn(0, 7, 5).spawn(0, 8, 5).mark(1, Player::human, 7).mark(2, Player::ai, 7).mark(2.5, Player::human, 8)
      .intercept(3, Player::ai, 7, 5);
  EXPECT_EQ(count_steals(b.log, Player::ai), 1);
}

TEST(Steals, ThiefFirstIsNotASteal) {
  LogBuilder b;
  b.spawn(0, 7, 5).mark(1, Player::ai, 7).intercept(3, Player::ai, 7, 5);
  EXPECT_EQ(count_steals(b.log, Player::ai), 0);
  // the human marks after the AI: the AI's interception is a steal only via
  // the mark being live at interception time
  LogBuilder c;
  c.spawn(0, 7, 5).mark(1, Player::ai, 7).mark(2, Player::human, 7).intercept(3, Player::ai, 7, 5);
  EXPECT_EQ(count_steals(c.log, Player::ai), 1);
}

TEST(Steals, ExpiredMarkDoesNotCount) {
  LogBuilder b;
  b.spawn(0, 7, 5).spawn(0, 8, 5).mark(1, Player::human, 8).intercept(2, Player::human, 8, 5).mark(2.5, Player::ai, 7)
      .intercept(3, Player::ai, 7, 5);
  EXPECT_EQ(count_steals(b.log, Player::ai), 0);
  LogBuilder c;
  c.spawn(0, 7, 5).mark(1, Player::human, 7).mark(1.5, Player::human, std::nullopt).mark(2, Player::ai, 7)
      .intercept(3, Player::ai, 7, 5);
  EXPECT_EQ(count_steals(c.log, Player::ai), 0);
}

TEST(Steals, HumanStealsToo) {
  LogBuilder b;
  b.spawn(0, 1, 9).mark(0.5, Player::ai, 1).mark(0.7, Player::human, 1).intercept(1, Player::human, 1, 9);
  EXPECT_EQ(count_steals(b.log, Player::human), 1);
  EXPECT_EQ(count_steals(b.log, Player::ai), 0);
}

TEST(Intersections, PerpendicularCrossing) {
  LogBuilder b;
  b.snap(0.0, {-50, 0}, {0, -50}).snap(0.2, {50, 0}, {0, 50});
  EXPECT_EQ(count_intersections(b.log), 1);
}

TEST(Intersections, OppositeSemicircles) {
  LogBuilder b;
  for (int k = 0; k <= 20; ++k) {
    const double a = M_PI * k / 20.0;
    b.snap(0.2 * k, {-100 * std::sin(a) - 10, 100 * std::cos(a)}, {100 * std::sin(a) + 10, 100 * std::cos(a)});
  }
  EXPECT_EQ(count_intersections(b.log), 0);
}

TEST(Intersections, ZigZagCountsEachCrossing) {
  // human zig-zags across the AI's vertical track
  LogBuilder b;
  const Vec2 a0{0, -200}, a1{0, 200};
  b.snap(0.0, {-20, -150}, a0).snap(0.6, {20, -100}, a1);   // crosses
  b.snap(1.2, {-20, -50}, a0);                               // crosses back
  b.snap(1.8, {-30, 0}, a0);                                 // no crossing: AI segment is a point
  b.snap(2.4, {20, 50}, a1);                                 // crosses
  EXPECT_EQ(count_intersections(b.log), 3);
  EXPECT_EQ(oracle::tally_log(b.log).intersections, 3);
}

TEST(Intersections, RefractoryPeriod) {
  LogBuilder b;
  b.snap(0.0, {-10, 0}, {0, -10}).snap(0.2, {10, 0}, {0, 10}).snap(0.4, {-10, 0}, {0, -10});
  EXPECT_EQ(count_intersections(b.log), 1);
  MetricsConfig none{0.0};
  EXPECT_EQ(count_intersections(b.log, none), 2);
}

TEST(MeanDistance, Examples) {
  LogBuilder b;
  b.snap(0, {-100, 0}, {100, 0});
  EXPECT_DOUBLE_EQ(mean_distance(b.log), 200.0);
  LogBuilder c;
  c.snap(0, {0, 0}, {100, 0}).snap(0.2, {0, 0}, {0, 200}).snap(0.4, {0, 0}, {-300, 0});
  EXPECT_DOUBLE_EQ(mean_distance(c.log), 200.0);
}

TEST(MeanDistance, MissingSnapshotsRejected) {
  LogBuilder b;
  b.spawn(0, 0, 4);
  EXPECT_THROW(mean_distance(b.log), MetricsError);
  EXPECT_THROW(count_intersections(b.log), MetricsError);
}

TEST(MetricsCsv, ColumnsAndFormatting) {
  MetricsRow r;
  r.human_rel_score = 0.3;
  r.ai_rel_score = 0.25;
  r.team_rel_score = 0.55;
  r.human_points = 30;
  r.ai_points = 25;
  r.score_inequality = 5;
  r.mean_distance = 200;
  r.density = 15;
  r.agent = "omit";
  r.seed = 42;
  std::ostringstream out;
  write_metrics_csv(out, {r});
  EXPECT_EQ(out.str(),
            "human_rel_score,ai_rel_score,team_rel_score,human_points,ai_points,score_inequality,ai_steals,"
            "human_steals,intersections,mean_distance,density,agent,seed\n"
            "0.300000,0.250000,0.550000,30,25,5,0,0,0,200.000000,15,omit,42\n");
}

TEST(ComputeMetrics, AgreesWithIndependentTally) {
  int steals = 0;
  for (auto kind : kAllAgentKinds) {
    for (int density : {5, 15}) {
      EpisodeSpec spec;
      spec.engine.density = density;
      spec.engine.seed = 300 + density;
      spec.engine.round_length_s = 60;
      spec.agent = kind;
      spec.proxy_seed = 9;
      EpisodeRunner runner(spec);
      const auto& log = runner.run_to_end();
      const auto row = compute_metrics(log);
      const auto tally = oracle::tally_log(log);
      ASSERT_GT(tally.available, 0);
      EXPECT_EQ(row.human_points, tally.human_points);
      EXPECT_EQ(row.ai_points, tally.ai_points);
      EXPECT_EQ(row.score_inequality, std::abs(tally.human_points - tally.ai_points));
      EXPECT_DOUBLE_EQ(row.human_rel_score, double(tally.human_points) / tally.available);
      EXPECT_EQ(row.ai_steals, tally.ai_steals);
      EXPECT_EQ(row.human_steals, tally.human_steals);
      EXPECT_EQ(row.intersections, tally.intersections);
      EXPECT_NEAR(row.mean_distance, tally.mean_distance, 1e-9);
      EXPECT_EQ(row.human_points, runner.world().score(Player::human));
      EXPECT_EQ(row.ai_points, runner.world().score(Player::ai));
      EXPECT_EQ(tally.snapshots, 301);
      steals += tally.ai_steals + tally.human_steals;
    }
  }
  EXPECT_GT(steals, 0);
}
