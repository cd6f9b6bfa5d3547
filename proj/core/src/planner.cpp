#include "teamsim/planner.hpp"

#include <algorithm>
#include <cmath>

namespace teamsim {

std::vector<int> Plan::ids() const {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.target_id);
  return out;
}

void DiscountModel::observe_spawn_interval(double interval) {
  if (interval < 0.0) return;
  spawn_interval_ema = ema_lambda * interval + (1.0 - ema_lambda) * spawn_interval_ema;
  // Keep the estimate strictly positive under bursts of same-tick spawns.
  spawn_interval_ema = std::max(spawn_interval_ema, 1e-6);
}

int estimate_K(double elapsed, const DiscountModel& discount) {
  return static_cast<int>(std::lround(std::max(elapsed, 0.0) / discount.spawn_interval_ema));
}

namespace {

struct Frontier {
  Vec2 pos;
  double elapsed = 0.0;
  double value = 0.0;
};

std::vector<const Target*> considered_targets(const PlanningInput& in) {
  std::vector<const Target*> out;
  for (int id : in.consideration) {
    auto it = std::find_if(in.targets.begin(), in.targets.end(),
                           [id](const Target& t) { return t.id == id; });
    if (it != in.targets.end() && it->visible() && in.values->contains(id)) out.push_back(&*it);
  }
  std::sort(out.begin(), out.end(), [](const Target* a, const Target* b) { return a->id < b->id; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Intercept `t` starting from `from` after `from.elapsed` seconds.
std::optional<std::pair<PlanStep, Frontier>> extend(const PlanningInput& in, const Frontier& from,
                                                    const Target& t) {
  const Vec2 target_now = t.position_at(from.elapsed);
  const auto sol = solve_interception(from.pos, in.agent_speed, target_now, t.vel, in.arena);
  if (!sol.reachable) return std::nullopt;
  const double arrival = from.elapsed + sol.time;
  const int k = estimate_K(arrival, in.discount);
  Frontier next{sol.point, arrival, from.value + in.values->at(t.id) * std::pow(in.discount.alpha, k)};
  return std::pair{PlanStep{t.id, sol.point, arrival}, next};
}

void search(const PlanningInput& in, const std::vector<const Target*>& pool, const Frontier& at,
            std::vector<PlanStep>& prefix, std::vector<bool>& used, std::vector<Plan>& out) {
  if (static_cast<int>(prefix.size()) == kMaxPlanDepth) return;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    auto step = extend(in, at, *pool[i]);
    if (!step) continue;
    prefix.push_back(step->first);
    out.push_back(Plan{prefix, step->second.value, step->second.elapsed});
    used[i] = true;
    search(in, pool, step->second, prefix, used, out);
    used[i] = false;
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Plan> enumerate_plans(const PlanningInput& input) {
  std::vector<Plan> out;
  if (input.values == nullptr) return out;
  const auto pool = considered_targets(input);
  std::vector<PlanStep> prefix;
  std::vector<bool> used(pool.size(), false);
  search(input, pool, Frontier{input.agent_pos, 0.0, 0.0}, prefix, used, out);
  return out;
}

Plan evaluate_sequence(const PlanningInput& input, std::span<const int> ids) {
  Plan plan;
  if (input.values == nullptr) return plan;
  const auto pool = considered_targets(input);
  Frontier at{input.agent_pos, 0.0, 0.0};
  for (int id : ids) {
    if (static_cast<int>(plan.steps.size()) == kMaxPlanDepth) break;
    auto it = std::find_if(pool.begin(), pool.end(), [id](const Target* t) { return t->id == id; });
    if (it == pool.end()) break;
    if (std::any_of(plan.steps.begin(), plan.steps.end(),
                    [id](const PlanStep& s) { return s.target_id == id; })) {
      break;
    }
    auto step = extend(input, at, **it);
    if (!step) break;
    plan.steps.push_back(step->first);
    at = step->second;
  }
  plan.discounted_value = at.value;
  plan.total_time = at.elapsed;
  return plan;
}

bool plan_better(const Plan& a, const Plan& b) {
  if (a.discounted_value != b.discounted_value) return a.discounted_value > b.discounted_value;
  if (a.total_time != b.total_time) return a.total_time < b.total_time;
  return a.ids() < b.ids();
}

std::optional<Plan> best_plan(std::span<const Plan> plans) {
  if (plans.empty()) return std::nullopt;
  const Plan* best = &plans.front();
  for (const auto& p : plans.subspan(1)) {
    if (plan_better(p, *best)) best = &p;
  }
  return *best;
}

bool should_switch(std::optional<double> current_remaining, double candidate_value) {
  if (!current_remaining) return true;
  return candidate_value >= kSwitchRatio * *current_remaining;
}

}  // namespace teamsim
