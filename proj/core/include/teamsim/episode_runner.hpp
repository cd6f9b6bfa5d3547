#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "teamsim/agents.hpp"
#include "teamsim/engine.hpp"

namespace teamsim {

struct EpisodeSpec {
  EngineConfig engine;
  AgentKind agent = AgentKind::omit;
  // Empty: human clicks arrive through queue_human_click (live play).
  std::optional<HumanProxy> proxy = HumanProxy{};
  std::uint64_t proxy_seed = 0;
  double replan_interval_s = 0.25;
  double alpha = 0.9;
};

// What the agent saw and did at one decision point.
struct DecisionRecord {
  double t = 0.0;
  AgentAction action;
  std::vector<int> consideration;
  std::optional<int> human_mark;
  std::vector<int> human_path_targets;
  Vec2 human_pos;
  Vec2 ai_pos;
  std::optional<Vec2> human_side;
  std::optional<Plan> adopted;
  double ema_rt = 0.0;
  std::optional<double> pending_until;
  bool blocked_by_delay = false;
};

// Drives one round: human input (proxy or queued live clicks) and the agent act
// at each tick boundary, then the world advances one step.
class EpisodeRunner {
 public:
  explicit EpisodeRunner(const EpisodeSpec& spec);

  const World& world() const { return world_; }
  const AgentState& agent_state() const { return agent_; }
  bool finished() const { return world_.finished(); }

  void queue_human_click(ClickAction action) { pending_human_.push_back(action); }
  void set_decision_observer(std::function<void(const DecisionRecord&)> observer) {
    observer_ = std::move(observer);
  }

  // Apply queued inputs and decisions, then tick once.
  void step();
  const EpisodeLog& run_to_end();

 private:
  bool human_busy() const;
  void on_human_click();
  void scan_new_events();

  EpisodeSpec spec_;
  World world_;
  AgentState agent_;
  Rng proxy_rng_;
  std::deque<ClickAction> pending_human_;
  std::function<void(const DecisionRecord&)> observer_;

  std::optional<double> human_idle_since_;
  double proxy_ready_at_ = 0.0;
  bool human_center_trip_ = false;
  std::vector<double> recent_rts_;

  double next_decision_t_ = 0.0;
  bool decision_triggered_ = true;
  bool delay_blocked_ = false;
  double last_spawn_t_ = 0.0;
  std::size_t scanned_events_ = 0;
};

std::string episode_proxy_name(const EpisodeSpec& spec);

}  // namespace teamsim
