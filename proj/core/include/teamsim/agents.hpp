#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "teamsim/engine.hpp"
#include "teamsim/planner.hpp"
#include "teamsim/rng.hpp"

namespace teamsim {

enum class AgentKind { ignorant, omit, divide, delay, bottom_feeder };

inline constexpr std::array kAllAgentKinds{AgentKind::ignorant, AgentKind::omit, AgentKind::divide,
                                           AgentKind::delay, AgentKind::bottom_feeder};

std::string_view to_string(AgentKind kind);
AgentKind agent_kind_from_string(std::string_view name);  // throws std::invalid_argument

// Everything but the ignorant agent drops the human's targets from consideration.
constexpr bool omits_human_targets(AgentKind kind) { return kind != AgentKind::ignorant; }

struct HumanIntent {
  std::optional<int> marked_target;
  std::vector<int> path_targets;  // visible targets the current trajectory sweeps through
  std::vector<double> last_response_times;
  Vec2 human_pos;
};

// Reads the human's mark and sweeps their straight-line path against the
// propagated motion of every other visible target.
HumanIntent read_intent(const World& world, std::vector<double> recent_rts = {});

// Response-time tracker for the delay agent: span-5 EMA, weight 2/(5+1).
inline constexpr double kDelayEmaWeight = 1.0 / 3.0;
inline constexpr double kInitialResponseTime = 1.0;

struct DelayState {
  double ema_rt = kInitialResponseTime;
  std::optional<double> anchor;  // clock of the interception that started the wait

  std::optional<double> pending_until() const {
    return anchor ? std::optional<double>(*anchor + ema_rt) : std::nullopt;
  }
};

DelayState update_delay(DelayState state, double observed_rt);

struct AgentAction {
  enum class Type { wait, click_target, click_center };
  Type type = Type::wait;
  int target_id = -1;

  static AgentAction wait() { return {}; }
  static AgentAction center() { return {Type::click_center, -1}; }
  static AgentAction click(int id) { return {Type::click_target, id}; }
  bool is_click() const { return type != Type::wait; }
  std::optional<ClickAction> to_click() const;
};

struct ConsiderationResult {
  std::vector<int> ids;
  // Direction from the center toward the human's side, when divide applies.
  std::optional<Vec2> human_side;
};

// Default human side for the divide agent before any well-defined direction:
// a vertical dividing line with the human on the -x half.
inline constexpr Vec2 kDefaultHumanSide{-1.0, 0.0};

ConsiderationResult consideration_set(AgentKind kind, const World& snapshot,
                                      const HumanIntent& intent,
                                      std::optional<Vec2> previous_human_side = std::nullopt);

ValueMap agent_values(AgentKind kind, const ValueMap& visible_values);
ValueMap visible_values(const World& snapshot);

struct AgentState {
  AgentKind kind = AgentKind::ignorant;
  std::vector<int> plan;  // remaining target ids of the active plan
  DelayState delay;
  std::optional<Vec2> human_side;
  DiscountModel discount;
};

struct Decision {
  AgentAction action;
  AgentState state;
  std::optional<Plan> adopted;
  std::vector<int> consideration;
  bool blocked_by_delay = false;
};

Decision decide(const AgentState& state, const World& snapshot, const HumanIntent& intent);

// Scripted stand-ins for a human participant in headless runs.
enum class ProxyKind { greedy, random, idle };

std::string_view to_string(ProxyKind kind);
ProxyKind proxy_kind_from_string(std::string_view name);  // throws std::invalid_argument

struct HumanProxy {
  ProxyKind kind = ProxyKind::greedy;
  double reaction_median_s = 0.8;
  double reaction_sigma_log = 0.4;
  double value_exponent = 1.0;

  double sample_reaction_delay(Rng& rng) const;
};

AgentAction proxy_decide(const HumanProxy& proxy, const World& snapshot, Rng& rng);

}  // namespace teamsim
