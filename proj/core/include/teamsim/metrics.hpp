#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamsim/episode_log.hpp"

namespace teamsim {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RelativeScores {
  double human = 0.0;
  double ai = 0.0;
  double team = 0.0;
};

struct MetricsConfig {
  double intersection_refractory_s = 0.5;
};

struct MetricsRow {
  double human_rel_score = 0.0;
  double ai_rel_score = 0.0;
  double team_rel_score = 0.0;
  int human_points = 0;
  int ai_points = 0;
  int score_inequality = 0;
  int ai_steals = 0;
  int human_steals = 0;
  int intersections = 0;
  double mean_distance = 0.0;
  int density = 0;
  std::string agent;
  std::uint64_t seed = 0;
};

// Points available = sum of values of every target spawned during the round.
int total_available_points(const EpisodeLog& log);
int points_scored(const EpisodeLog& log, Player player);
RelativeScores relative_scores(const EpisodeLog& log);

// Interceptions by `thief` of a target the other player was pursuing: the
// victim's mark was active at interception, or was already active when the
// thief first marked the target.
int count_steals(const EpisodeLog& log, Player thief);

// Crossings of the two avatars' motion segments between consecutive trajectory
// snapshots, with a refractory period between counted crossings.
int count_intersections(const EpisodeLog& log, const MetricsConfig& config = {});
double mean_distance(const EpisodeLog& log);

MetricsRow compute_metrics(const EpisodeLog& log, const MetricsConfig& config = {});

// Stable column order, header first.
const std::vector<std::string>& metrics_columns();
std::vector<std::string> metrics_fields(const MetricsRow& row);
std::string format_metric(double value);
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace teamsim
