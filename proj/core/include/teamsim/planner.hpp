#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "teamsim/engine.hpp"
#include "teamsim/geometry.hpp"

namespace teamsim {

inline constexpr int kMaxPlanDepth = 3;
// A candidate plan must be worth at least this multiple of the active plan's
// remaining value before the agent switches.
inline constexpr double kSwitchRatio = 1.2;

using ValueMap = std::map<int, double>;

struct PlanStep {
  int target_id = 0;
  Vec2 point;
  double arrival_time = 0.0;  // seconds after the snapshot
};

struct Plan {
  std::vector<PlanStep> steps;
  double discounted_value = 0.0;
  double total_time = 0.0;

  std::vector<int> ids() const;
  bool empty() const { return steps.empty(); }
};

// Values a later interception by alpha^K, K being the number of spawns expected
// before it happens. K comes from an online average of inter-spawn intervals.
struct DiscountModel {
  double alpha = 0.9;
  double spawn_interval_ema = 5.0;
  double ema_lambda = 0.2;

  void observe_spawn_interval(double interval);
};

int estimate_K(double elapsed, const DiscountModel& discount);

struct PlanningInput {
  std::span<const Target> targets;  // snapshot; only visible entries are used
  std::span<const int> consideration;
  const ValueMap* values = nullptr;
  DiscountModel discount;
  Vec2 agent_pos;
  double agent_speed = 200.0;
  Arena arena;
};

// All reachable interception sequences of 1..3 distinct considered targets.
std::vector<Plan> enumerate_plans(const PlanningInput& input);

// Price a fixed id sequence on the snapshot, truncating at the first step that
// is unreachable or outside the consideration set.
Plan evaluate_sequence(const PlanningInput& input, std::span<const int> ids);

// Highest discounted value; ties go to the shorter plan, then the
// lexicographically smaller id sequence.
std::optional<Plan> best_plan(std::span<const Plan> plans);
bool plan_better(const Plan& a, const Plan& b);

// `current_remaining` is empty when there is no valid active plan.
bool should_switch(std::optional<double> current_remaining, double candidate_value);

}  // namespace teamsim
