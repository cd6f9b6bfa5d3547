#include "teamsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>

#include "teamsim/geometry.hpp"

namespace teamsim {

int total_available_points(const EpisodeLog& log) {
  int total = 0;
  for (const auto& e : log.events) {
    if (const auto* s = e.as<SpawnEvent>()) total += s->value;
  }
  return total;
}

int points_scored(const EpisodeLog& log, Player player) {
  int total = 0;
  for (const auto& e : log.events) {
    if (const auto* ic = e.as<InterceptEvent>(); ic && ic->player == player) total += ic->value;
  }
  return total;
}

RelativeScores relative_scores(const EpisodeLog& log) {
  const int available = total_available_points(log);
  if (available <= 0) throw MetricsError("empty round");
  RelativeScores r;
  const int human = points_scored(log, Player::human);
  const int ai = points_scored(log, Player::ai);
  r.human = static_cast<double>(human) / available;
  r.ai = static_cast<double>(ai) / available;
  r.team = r.human + r.ai;
  return r;
}

int count_steals(const EpisodeLog& log, Player thief) {
  const Player victim = other(thief);
  std::optional<int> victim_mark;
  // Targets the victim had actively marked when the thief first marked them.
  std::map<int, bool> first_thief_mark;

  int steals = 0;
  for (const auto& e : log.events) {
    if (const auto* m = e.as<MarkSetEvent>()) {
      if (m->player == victim) {
        victim_mark = m->target_id;
      } else if (m->target_id && !first_thief_mark.contains(*m->target_id)) {
        first_thief_mark[*m->target_id] = victim_mark == m->target_id;
      }
    } else if (const auto* ic = e.as<InterceptEvent>()) {
      if (ic->player == thief) {
        const bool active = victim_mark == ic->target_id;
        auto it = first_thief_mark.find(ic->target_id);
        const bool marked_first = it != first_thief_mark.end() && it->second;
        if (active || marked_first) ++steals;
      }
      if (victim_mark == ic->target_id) victim_mark.reset();
    } else if (const auto* ex = e.as<ExitEvent>()) {
      if (victim_mark == ex->target_id) victim_mark.reset();
    }
  }
  return steals;
}

namespace {

std::vector<std::pair<double, const SnapshotEvent*>> snapshots(const EpisodeLog& log) {
  std::vector<std::pair<double, const SnapshotEvent*>> out;
  for (const auto& e : log.events) {
    if (const auto* s = e.as<SnapshotEvent>()) out.emplace_back(e.t, s);
  }
  if (out.empty()) throw MetricsError("log lacks trajectory snapshots");
  return out;
}

}  // namespace

int count_intersections(const EpisodeLog& log, const MetricsConfig& config) {
  const auto snaps = snapshots(log);
  int count = 0;
  std::optional<double> last_counted;
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    const auto& a = *snaps[i - 1].second;
    const auto& b = *snaps[i].second;
    if (!segments_intersect(a.human_pos, b.human_pos, a.ai_pos, b.ai_pos)) continue;
    const double t = snaps[i].first;
    if (last_counted && t - *last_counted < config.intersection_refractory_s) continue;
    ++count;
    last_counted = t;
  }
  return count;
}

double mean_distance(const EpisodeLog& log) {
  const auto snaps = snapshots(log);
  double sum = 0.0;
  for (const auto& [t, s] : snaps) sum += distance(s->human_pos, s->ai_pos);
  return sum / static_cast<double>(snaps.size());
}

MetricsRow compute_metrics(const EpisodeLog& log, const MetricsConfig& config) {
  MetricsRow row;
  const auto rel = relative_scores(log);
  row.human_points = points_scored(log, Player::human);
  row.ai_points = points_scored(log, Player::ai);
  row.human_rel_score = rel.human;
  row.ai_rel_score = rel.ai;
  row.team_rel_score = rel.team;
  row.score_inequality = std::abs(row.human_points - row.ai_points);
  row.ai_steals = count_steals(log, Player::ai);
  row.human_steals = count_steals(log, Player::human);
  row.intersections = count_intersections(log, config);
  row.mean_distance = mean_distance(log);
  row.density = log.header.density;
  row.agent = log.header.agent;
  row.seed = log.header.seed;
  return row;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "human_rel_score", "ai_rel_score", "team_rel_score", "human_points", "ai_points",
      "score_inequality", "ai_steals", "human_steals", "intersections", "mean_distance",
      "density", "agent", "seed"};
  return cols;
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::vector<std::string> metrics_fields(const MetricsRow& r) {
  return {format_metric(r.human_rel_score), format_metric(r.ai_rel_score),
          format_metric(r.team_rel_score),  std::to_string(r.human_points),
          std::to_string(r.ai_points),      std::to_string(r.score_inequality),
          std::to_string(r.ai_steals),      std::to_string(r.human_steals),
          std::to_string(r.intersections),  format_metric(r.mean_distance),
          std::to_string(r.density),        r.agent,
          std::to_string(r.seed)};
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& row : rows) {
    const auto fields = metrics_fields(row);
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  }
}

}  // namespace teamsim
