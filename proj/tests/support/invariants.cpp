#include "invariants.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "oracles.hpp"

namespace oracle {

using namespace teamsim;

namespace {

std::string dump(const EpisodeLog& log) {
  std::ostringstream ss;
  write_jsonl(ss, log);
  return ss.str();
}

void note(EpisodeCheck& c, const std::string& what, double t) {
  if (c.first_failure.empty()) c.first_failure = what + " at t=" + std::to_string(t);
}

}  // namespace

EpisodeCheck run_checked_episode(const EpisodeSpec& spec, EpisodeLog* log_out) {
  EpisodeCheck c;
  EpisodeRunner runner(spec);
  const AgentKind kind = spec.agent;
  const int density = spec.engine.density;

  // Independent log tallies.
  std::map<int, int> spawn_value;
  std::set<int> intercepted;
  int available = 0, human_pts = 0, ai_pts = 0, exited_visible = 0;
  std::optional<int> human_mark;
  std::optional<double> last_ai_intercept;
  std::optional<Vec2> side_memory;
  std::size_t seen = 0;

  auto scan = [&](const World& w) {
    const auto& ev = w.log().events;
    for (; seen < ev.size(); ++seen) {
      const Event& e = ev[seen];
      if (const auto* s = e.as<SpawnEvent>()) {
        spawn_value[s->target_id] = s->value;
        available += s->value;
      } else if (const auto* m = e.as<MarkSetEvent>()) {
        if (m->player == Player::human) {
          human_mark = m->target_id;
        } else if (omits_human_targets(kind) && m->target_id && m->target_id == human_mark) {
          ++c.omit_violations;
          note(c, "AI marked the human's active target", e.t);
        }
      } else if (const auto* ic = e.as<InterceptEvent>()) {
        if (!intercepted.insert(ic->target_id).second) {
          ++c.engine_violations;
          note(c, "target intercepted twice", e.t);
        }
        (ic->player == Player::human ? human_pts : ai_pts) += spawn_value.at(ic->target_id);
        if (ic->player == Player::ai) last_ai_intercept = e.t;
        if (human_mark == ic->target_id) human_mark.reset();
      } else if (const auto* ex = e.as<ExitEvent>()) {
        if (!intercepted.count(ex->target_id)) exited_visible += spawn_value.at(ex->target_id);
        if (human_mark == ex->target_id) human_mark.reset();
      }
    }
  };

  runner.set_decision_observer([&](const DecisionRecord& rec) {
    const World& w = runner.world();
    scan(w);  // the human's click of this boundary is already logged
    if (kind == AgentKind::divide && rec.action.type == AgentAction::Type::click_target) {
      ++c.divide_checked;
      Vec2 side = side_memory.value_or(Vec2{-1.0, 0.0});
      const double r = std::hypot(rec.human_pos.x, rec.human_pos.y);
      if (r > 1e-9) side = Vec2{rec.human_pos.x / r, rec.human_pos.y / r};
      const Target* t = w.find_target(rec.action.target_id);
      const auto sol = solve_interception(rec.ai_pos, w.avatar(Player::ai).speed, t->pos, t->vel, w.arena());
      if (!(sol.point.x * side.x + sol.point.y * side.y < 0.0)) {
        ++c.divide_violations;
        note(c, "divide clicked a target on the human's side", rec.t);
      }
    }
    if (kind == AgentKind::divide) {
      const double r = std::hypot(rec.human_pos.x, rec.human_pos.y);
      if (r > 1e-9) side_memory = Vec2{rec.human_pos.x / r, rec.human_pos.y / r};
    }
    if (kind == AgentKind::delay && rec.action.is_click()) {
      ++c.delay_checked;
      const double anchor = last_ai_intercept.value_or(0.0);
      if (rec.t + 1e-9 < anchor + rec.ema_rt) {
        ++c.delay_violations;
        note(c, "delay agent clicked inside its wait", rec.t);
      }
    }
    if (kind == AgentKind::bottom_feeder) {
      ++c.bottom_feeder_checked;
      const auto intent = read_intent(w);
      AgentState fresh;
      fresh.kind = AgentKind::bottom_feeder;
      fresh.discount = runner.agent_state().discount;
      const auto d = decide(fresh, w, intent);
      const auto omit_set = consideration_set(AgentKind::omit, w, intent).ids;
      std::map<int, double> inverted;
      for (const Target* t : w.visible_targets()) inverted[t->id] = 15 - t->value;
      const auto best = brute_force_best(w.targets(), omit_set, inverted, fresh.discount.alpha,
                                         fresh.discount.spawn_interval_ema, w.avatar(Player::ai).pos,
                                         w.avatar(Player::ai).speed, w.arena());
      const bool same = d.adopted.has_value() == best.has_value() &&
                        (!best || (d.adopted->ids() == best->ids && d.adopted->discounted_value == best->value));
      if (!same) {
        ++c.bottom_feeder_mismatches;
        note(c, "bottom_feeder plan differs from omit on inverted values", rec.t);
      }
    }
  });

  while (!runner.finished()) {
    runner.step();
    ++c.ticks;
    const World& w = runner.world();
    scan(w);
    int still_visible = 0;
    for (const Target* t : w.visible_targets()) still_visible += t->value;
    const bool ok = w.visible_count() <= density && w.visible_count() + w.ghost_count() == density &&
                    human_pts + ai_pts + exited_visible + still_visible == available &&
                    human_pts == w.score(Player::human) && ai_pts == w.score(Player::ai);
    if (!ok) {
      ++c.engine_violations;
      note(c, "engine invariant", w.clock());
    }
  }

  const EpisodeLog& log = runner.world().log();
  const std::string text = dump(log);
  try {
    std::istringstream in(text);
    const World again = replay(read_jsonl(in));
    if (dump(again.log()) != text) {
      ++c.replay_failures;
      note(c, "replay text differs", 0.0);
    }
  } catch (const std::exception& e) {
    ++c.replay_failures;
    note(c, std::string("replay: ") + e.what(), 0.0);
  }
  if (log_out) *log_out = log;
  return c;
}

}  // namespace oracle
