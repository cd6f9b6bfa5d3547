#include "teamsim/episode_runner.hpp"

#include <string>

namespace teamsim {

namespace {
constexpr std::size_t kRecentResponseTimes = 5;
}

std::string episode_proxy_name(const EpisodeSpec& spec) {
  return spec.proxy ? std::string(to_string(spec.proxy->kind)) : std::string("live");
}

EpisodeRunner::EpisodeRunner(const EpisodeSpec& spec)
    : spec_(spec),
      world_(spec.engine, std::string(to_string(spec.agent)), episode_proxy_name(spec)),
      proxy_rng_(spec.proxy_seed) {
  agent_.kind = spec.agent;
  agent_.discount.alpha = spec.alpha;
  // The delay agent also waits before its first selection of the round.
  agent_.delay.anchor = 0.0;
  human_idle_since_ = 0.0;
  if (spec_.proxy) proxy_ready_at_ = spec_.proxy->sample_reaction_delay(proxy_rng_);
  scanned_events_ = world_.log().events.size();
}

bool EpisodeRunner::human_busy() const {
  const Avatar& h = world_.avatar(Player::human);
  if (h.arrived() || !h.nav_dest) return false;
  return h.mark.has_value() || human_center_trip_;
}

void EpisodeRunner::on_human_click() {
  const double now = world_.clock();
  if (human_idle_since_) {
    const double rt = now - *human_idle_since_;
    agent_.delay = update_delay(agent_.delay, rt);
    recent_rts_.push_back(rt);
    if (recent_rts_.size() > kRecentResponseTimes) recent_rts_.erase(recent_rts_.begin());
  }
  human_idle_since_.reset();
  human_center_trip_ = !world_.avatar(Player::human).mark.has_value();
  decision_triggered_ = true;
}

void EpisodeRunner::step() {
  const double now = world_.clock();

  if (spec_.proxy) {
    if (human_idle_since_ && now >= proxy_ready_at_) {
      const auto action = proxy_decide(*spec_.proxy, world_, proxy_rng_);
      if (auto click = action.to_click()) {
        if (world_.handle_click(Player::human, *click) == ClickStatus::accepted) on_human_click();
      }
    }
  } else {
    while (!pending_human_.empty()) {
      const ClickAction click = pending_human_.front();
      pending_human_.pop_front();
      if (world_.handle_click(Player::human, click) == ClickStatus::accepted) on_human_click();
    }
  }

  if (delay_blocked_) {
    const auto gate = agent_.delay.pending_until();
    if (!gate || now >= *gate) decision_triggered_ = true;
  }

  if (decision_triggered_ || now >= next_decision_t_) {
    const HumanIntent intent = read_intent(world_, recent_rts_);
    Decision d = decide(agent_, world_, intent);
    agent_ = std::move(d.state);
    delay_blocked_ = d.blocked_by_delay;
    if (observer_) {
      DecisionRecord rec;
      rec.t = now;
      rec.action = d.action;
      rec.consideration = std::move(d.consideration);
      rec.human_mark = intent.marked_target;
      rec.human_path_targets = intent.path_targets;
      rec.human_pos = intent.human_pos;
      rec.ai_pos = world_.avatar(Player::ai).pos;
      rec.human_side = agent_.human_side;
      rec.adopted = std::move(d.adopted);
      rec.ema_rt = agent_.delay.ema_rt;
      rec.pending_until = agent_.delay.pending_until();
      rec.blocked_by_delay = d.blocked_by_delay;
      observer_(rec);
    }
    if (auto click = d.action.to_click()) world_.handle_click(Player::ai, *click);
    decision_triggered_ = false;
    while (next_decision_t_ <= now) next_decision_t_ += spec_.replan_interval_s;
  }

  const bool busy_before = human_busy();
  world_.tick();
  scan_new_events();
  if (busy_before && !human_busy() && !human_idle_since_) {
    human_idle_since_ = world_.clock();
    human_center_trip_ = false;
    if (spec_.proxy) {
      proxy_ready_at_ = world_.clock() + spec_.proxy->sample_reaction_delay(proxy_rng_);
    }
  }
}

void EpisodeRunner::scan_new_events() {
  const auto& events = world_.log().events;
  for (; scanned_events_ < events.size(); ++scanned_events_) {
    const Event& e = events[scanned_events_];
    if (const auto* ic = e.as<InterceptEvent>()) {
      decision_triggered_ = true;
      if (ic->player == Player::ai) agent_.delay.anchor = e.t;
    } else if (e.as<ExitEvent>()) {
      decision_triggered_ = true;
    } else if (e.as<SpawnEvent>() && e.t > 0.0) {
      agent_.discount.observe_spawn_interval(e.t - last_spawn_t_);
      last_spawn_t_ = e.t;
    }
  }
}

const EpisodeLog& EpisodeRunner::run_to_end() {
  while (!finished()) step();
  return world_.log();
}

}  // namespace teamsim
