#pragma once

// Reference computations used by the tests. Each is written from the problem
// statement rather than from the library code it checks; the only library
// function they share is solve_interception (for the planner enumerator).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "teamsim/engine.hpp"
#include "teamsim/preference.hpp"

namespace oracle {

using teamsim::Arena;
using teamsim::Vec2;

// First point of a `step`-spaced time grid at which the pursuer's reach circle
// contains the target, i.e. |d + u t| <= s t.
double scan_interception_time(Vec2 pursuer, double speed, Vec2 target_pos, Vec2 target_vel,
                              double step = 1e-4);

struct BrutePlan {
  std::vector<int> ids;
  double value = 0.0;
  double time = 0.0;
};

// Exhaustive search over every ordered sequence of 1..3 distinct considered
// visible targets, written as explicit nested loops.
std::optional<BrutePlan> brute_force_best(const std::vector<teamsim::Target>& targets,
                                          const std::vector<int>& consideration,
                                          const std::map<int, double>& values, double alpha,
                                          double spawn_interval, Vec2 agent, double speed,
                                          const Arena& arena);
// Number of sequences the brute force priced (including truncated ones).
std::size_t brute_force_sequences(std::size_t n);

// Integral of the Beta(1,2) density 2(1-x) over [v/16, (v+1)/16).
double beta12_bin_mass(int v);

// 2^n k! (n-k)! / (n+1)! by running products.
double binomial_bf_products(int k, int n);

// Straight reading of a round log.
struct LogTally {
  int available = 0;
  int human_points = 0;
  int ai_points = 0;
  int human_steals = 0;
  int ai_steals = 0;
  int intersections = 0;
  double mean_distance = 0.0;
  int snapshots = 0;
};
LogTally tally_log(const teamsim::EpisodeLog& log, double refractory_s = 0.5);

// Segment crossing by solving the 2x2 system a1 + s(a2-a1) = b1 + t(b2-b1).
bool crossing_by_linear_solve(Vec2 a1, Vec2 a2, Vec2 b1, Vec2 b2);

// Synthetic choice data: per-feature x and y values are N(0, 1/2) so that each
// difference is standard normal; chose_x ~ Bernoulli(sigmoid(b0 + b . (x - y))).
struct SyntheticModel {
  double beta0 = 0.0;
  std::vector<double> beta;
};
std::vector<std::string> synthetic_feature_names(std::size_t p);
std::vector<teamsim::ChoiceRecord> synthetic_choices(const SyntheticModel& model, int records,
                                                     std::uint64_t seed, bool coin_flip = false);

// Accuracy of the generator's own decision rule: E[sigmoid(|eta|)] for
// eta ~ N(beta0, |beta|^2), by trapezoid quadrature.
double bayes_rate(const SyntheticModel& model);

// The generator's coefficients expressed on a standardized design.
std::vector<double> standardized_truth(const SyntheticModel& model, const teamsim::Design& design);

}  // namespace oracle
