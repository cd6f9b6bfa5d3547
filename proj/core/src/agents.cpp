#include "teamsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace teamsim {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::ignorant: return "ignorant";
    case AgentKind::omit: return "omit";
    case AgentKind::divide: return "divide";
    case AgentKind::delay: return "delay";
    case AgentKind::bottom_feeder: return "bottom_feeder";
  }
  return "?";
}

AgentKind agent_kind_from_string(std::string_view name) {
  for (auto k : kAllAgentKinds) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown agent kind '" + std::string(name) + "'");
}

std::string_view to_string(ProxyKind kind) {
  switch (kind) {
    case ProxyKind::greedy: return "greedy";
    case ProxyKind::random: return "random";
    case ProxyKind::idle: return "idle";
  }
  return "?";
}

ProxyKind proxy_kind_from_string(std::string_view name) {
  for (auto k : {ProxyKind::greedy, ProxyKind::random, ProxyKind::idle}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown proxy kind '" + std::string(name) + "'");
}

std::optional<ClickAction> AgentAction::to_click() const {
  switch (type) {
    case Type::click_target: return ClickAction::target(target_id);
    case Type::click_center: return ClickAction::center();
    case Type::wait: break;
  }
  return std::nullopt;
}

HumanIntent read_intent(const World& world, std::vector<double> recent_rts) {
  const Avatar& human = world.avatar(Player::human);
  HumanIntent intent;
  intent.marked_target = human.mark;
  intent.human_pos = human.pos;
  intent.last_response_times = std::move(recent_rts);

  if (!human.nav_dest || human.arrived()) return intent;
  const Vec2 to_dest = *human.nav_dest - human.pos;
  const double travel = norm(to_dest);
  const Vec2 human_vel = to_dest * (human.speed / travel);
  const double horizon = travel / human.speed;
  const double reach = world.config().collision_radius;

  for (const Target* t : world.visible_targets()) {
    if (human.mark == t->id) continue;
    if (min_distance_linear(t->pos - human.pos, t->vel - human_vel, horizon) <= reach) {
      intent.path_targets.push_back(t->id);
    }
  }
  return intent;
}

DelayState update_delay(DelayState state, double observed_rt) {
  if (!(observed_rt >= 0.0)) throw std::invalid_argument("negative response time");
  state.ema_rt = kDelayEmaWeight * observed_rt + (1.0 - kDelayEmaWeight) * state.ema_rt;
  return state;
}

ValueMap visible_values(const World& snapshot) {
  ValueMap out;
  for (const Target* t : snapshot.visible_targets()) out[t->id] = t->value;
  return out;
}

ValueMap agent_values(AgentKind kind, const ValueMap& values) {
  if (kind != AgentKind::bottom_feeder) return values;
  ValueMap out;
  for (const auto& [id, v] : values) out[id] = kMaxTargetValue - v;
  return out;
}

ConsiderationResult consideration_set(AgentKind kind, const World& snapshot,
                                      const HumanIntent& intent,
                                      std::optional<Vec2> previous_human_side) {
  ConsiderationResult out;
  const auto visible = snapshot.visible_targets();

  auto is_human_target = [&](int id) {
    return intent.marked_target == id ||
           std::find(intent.path_targets.begin(), intent.path_targets.end(), id) !=
               intent.path_targets.end();
  };

  if (kind != AgentKind::divide) {
    for (const Target* t : visible) {
      if (omits_human_targets(kind) && is_human_target(t->id)) continue;
      out.ids.push_back(t->id);
    }
    return out;
  }

  // The dividing line passes through the center, orthogonal to human->center.
  Vec2 side = previous_human_side.value_or(kDefaultHumanSide);
  const double r = norm(intent.human_pos);
  if (r > kGeometryTolerance) side = intent.human_pos * (1.0 / r);
  out.human_side = side;

  const Avatar& ai = snapshot.avatar(Player::ai);
  for (const Target* t : visible) {
    if (is_human_target(t->id)) continue;
    const auto sol = solve_interception(ai.pos, ai.speed, t->pos, t->vel, snapshot.arena());
    if (dot(sol.point, side) < -kGeometryTolerance) out.ids.push_back(t->id);
  }
  return out;
}

Decision decide(const AgentState& state, const World& snapshot, const HumanIntent& intent) {
  Decision d;
  d.state = state;
  const Avatar& ai = snapshot.avatar(Player::ai);

  auto considered = consideration_set(state.kind, snapshot, intent, state.human_side);
  if (considered.human_side) d.state.human_side = considered.human_side;
  d.consideration = considered.ids;

  const ValueMap values = agent_values(state.kind, visible_values(snapshot));
  PlanningInput input;
  input.targets = snapshot.targets();
  input.consideration = d.consideration;
  input.values = &values;
  input.discount = state.discount;
  input.agent_pos = ai.pos;
  input.agent_speed = ai.speed;
  input.arena = snapshot.arena();

  // Re-price what is left of the active plan on this snapshot.
  std::vector<int> remaining = state.plan;
  while (!remaining.empty()) {
    const Target* t = snapshot.find_target(remaining.front());
    if (t != nullptr && t->visible()) break;
    remaining.erase(remaining.begin());
  }
  Plan current = evaluate_sequence(input, remaining);
  std::optional<double> current_value;
  if (!current.empty()) current_value = current.discounted_value;

  const auto plans = enumerate_plans(input);
  const auto candidate = best_plan(plans);

  AgentAction action;
  if (!candidate && current.empty()) {
    d.state.plan.clear();
    const bool heading_center = !ai.mark && ai.nav_dest && *ai.nav_dest == Vec2{0.0, 0.0};
    action = heading_center ? AgentAction::wait() : AgentAction::center();
  } else {
    const Plan& chosen =
        candidate && should_switch(current_value, candidate->discounted_value) ? *candidate : current;
    d.adopted = chosen;
    d.state.plan = chosen.ids();
    const int first = chosen.steps.front().target_id;
    action = ai.mark == first ? AgentAction::wait() : AgentAction::click(first);
  }

  if (state.kind == AgentKind::delay && action.is_click()) {
    const auto gate = state.delay.pending_until();
    if (gate && snapshot.clock() < *gate) {
      action = AgentAction::wait();
      d.blocked_by_delay = true;
    }
  }
  d.action = action;
  return d;
}

double HumanProxy::sample_reaction_delay(Rng& rng) const {
  return reaction_median_s * std::exp(reaction_sigma_log * rng.normal());
}

AgentAction proxy_decide(const HumanProxy& proxy, const World& snapshot, Rng& rng) {
  const auto visible = snapshot.visible_targets();
  switch (proxy.kind) {
    case ProxyKind::idle:
      return AgentAction::wait();
    case ProxyKind::random:
      if (visible.empty()) return AgentAction::wait();
      return AgentAction::click(visible[rng.below(visible.size())]->id);
    case ProxyKind::greedy: {
      const Avatar& human = snapshot.avatar(Player::human);
      std::optional<int> best;
      double best_rate = -1.0;
      for (const Target* t : visible) {
        const auto sol = solve_interception(human.pos, human.speed, t->pos, t->vel, snapshot.arena());
        if (!sol.reachable) continue;
        const double rate =
            std::pow(static_cast<double>(t->value), proxy.value_exponent) / std::max(sol.time, 1e-9);
        if (rate > best_rate) {
          best_rate = rate;
          best = t->id;
        }
      }
      return best ? AgentAction::click(*best) : AgentAction::wait();
    }
  }
  return AgentAction::wait();
}

}  // namespace teamsim
