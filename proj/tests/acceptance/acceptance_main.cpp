// Acceptance checks, one PASS/FAIL line each. Exit status is non-zero when any
// check fails. Optional arguments select checks by name.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "invariants.hpp"
#include "oracles.hpp"
#include "teamsim/metrics.hpp"
#include "teamsim/planner.hpp"
#include "teamsim/preference.hpp"
#include "teamsim/session.hpp"

using namespace teamsim;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- interception solver -----------------------------------------------------

Outcome check_solver() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Arena open{1e12};
  const double speed = 200.0;
  double worst_dt = 0.0, worst_reach = 0.0;
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    auto in_disc = [&](double r) {
      const double a = 2 * M_PI * u(gen), rr = r * std::sqrt(u(gen));
      return Vec2{rr * std::cos(a), rr * std::sin(a)};
    };
    const Vec2 pursuer = in_disc(400), tp = in_disc(400);
    const double ang = 2 * M_PI * u(gen), mag = speed * (0.5 + 0.49 * u(gen));
    const Vec2 tv{mag * std::cos(ang), mag * std::sin(ang)};
    const auto sol = solve_interception(pursuer, speed, tp, tv, open);
    const double scan = oracle::scan_interception_time(pursuer, speed, tp, tv);
    const double dt = std::abs(sol.time - scan);
    const double reach = std::abs(std::hypot(sol.point.x - pursuer.x, sol.point.y - pursuer.y) - speed * sol.time);
    worst_dt = std::max(worst_dt, dt);
    worst_reach = std::max(worst_reach, reach);
    if (!sol.reachable || dt > 2e-4 || reach > 1e-6) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 5.0,
          fmt("10000 scenarios, %d off; max |dt|=%.2e s, max reach err=%.2e px, %.2f s", bad, worst_dt, worst_reach, secs)};
}

// --- planner ---------------------------------------------------------------

Outcome check_planner() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0, snapshots = 0, nonempty = 0;
  // keep drawing until 1000 snapshots actually have a plan to compare
  while (nonempty < 1000 && snapshots < 5000) {
    EngineConfig cfg;
    cfg.density = 1 + static_cast<int>(gen() % 6);
    cfg.seed = gen();
    World w(cfg);
    // move the AI around first so the pursuer is not always at its start
    const int ticks = static_cast<int>(gen() % 400);
    for (int k = 0; k < ticks; ++k) {
      if (k % 60 == 0 && !w.targets().empty()) {
        const auto vis = w.visible_targets();
        if (!vis.empty()) w.handle_click(Player::ai, ClickAction::target(vis[gen() % vis.size()]->id));
      }
      w.tick();
    }
    std::vector<int> consider;
    for (const Target* t : w.visible_targets()) {
      if (gen() % 5 != 0) consider.push_back(t->id);
    }
    ValueMap values;
    for (const Target* t : w.visible_targets()) values[t->id] = gen() % 3 == 0 ? 15 - t->value : t->value;
    DiscountModel disc;
    disc.alpha = 0.5 + 0.49 * u(gen);
    disc.spawn_interval_ema = 0.5 + 9.5 * u(gen);
    const Avatar& ai = w.avatar(Player::ai);
    PlanningInput in{w.targets(), consider, &values, disc, ai.pos, ai.speed, w.arena()};
    const auto plans = enumerate_plans(in);
    const auto best = best_plan(plans);
    const auto brute = oracle::brute_force_best(w.targets(), consider, values, disc.alpha, disc.spawn_interval_ema,
                                                ai.pos, ai.speed, w.arena());
    ++snapshots;
    if (best.has_value() != brute.has_value()) {
      ++mismatches;
      continue;
    }
    if (!best) continue;
    ++nonempty;
    if (best->discounted_value != brute->value || best->ids() != brute->ids) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0 && nonempty == 1000,
          fmt("%d snapshots (%d with a plan), %d mismatches, %.2f s", snapshots, nonempty, mismatches, secs)};
}

// --- value distribution -------------------------------------------------------

Outcome check_values() {
  Rng rng(4242);
  constexpr int kDraws = 1000000;
  std::array<long, 16> counts{};
  for (int i = 0; i < kDraws; ++i) ++counts.at(static_cast<std::size_t>(sample_target_value(rng)));
  int outside = 0;
  double worst = 0.0;
  for (int v = 0; v < 16; ++v) {
    const double m = oracle::beta12_bin_mass(v);
    const double sigma = std::sqrt(kDraws * m * (1 - m));
    const double z = std::abs(counts[v] - kDraws * m) / sigma;
    worst = std::max(worst, z);
    if (z > 3.0) ++outside;
  }
  const bool endpoints = oracle::beta12_bin_mass(0) == 31.0 / 256 && oracle::beta12_bin_mass(15) == 1.0 / 256;
  return {outside == 0 && endpoints, fmt("10^6 draws, %d bins beyond 3 sigma (max |z|=%.2f)", outside, worst)};
}

// --- engine and agent invariants ------------------------------------------------

struct EpisodeStats {
  AgentKind agent;
  int density;
  double ai_rel;
  int ai_steals;
};

struct InvariantRun {
  int episodes = 0;
  oracle::EpisodeCheck totals;
  std::vector<EpisodeStats> stats;
  double secs = 0;
};

InvariantRun& invariant_run() {
  static InvariantRun run;
  static bool done = false;
  if (done) return run;
  done = true;
  const auto t0 = Clock::now();
  for (int density : {5, 15}) {
    for (AgentKind kind : kAllAgentKinds) {
      for (int i = 0; i < 100; ++i) {
        EpisodeSpec spec;
        spec.engine.density = density;
        spec.engine.seed = Rng::derive_seed(1000 + density, i);
        spec.agent = kind;
        spec.proxy_seed = Rng::derive_seed(2000 + density, i);
        EpisodeLog log;
        const auto c = oracle::run_checked_episode(spec, &log);
        auto& t = run.totals;
        t.engine_violations += c.engine_violations;
        t.replay_failures += c.replay_failures;
        t.omit_violations += c.omit_violations;
        t.divide_violations += c.divide_violations;
        t.delay_violations += c.delay_violations;
        t.bottom_feeder_mismatches += c.bottom_feeder_mismatches;
        t.divide_checked += c.divide_checked;
        t.delay_checked += c.delay_checked;
        t.bottom_feeder_checked += c.bottom_feeder_checked;
        t.ticks += c.ticks;
        if (t.first_failure.empty() && !c.first_failure.empty()) {
          t.first_failure = std::string(to_string(kind)) + " d" + std::to_string(density) + " #" +
                            std::to_string(i) + ": " + c.first_failure;
        }
        const auto tally = oracle::tally_log(log);
        run.stats.push_back({kind, density, double(tally.ai_points) / tally.available, tally.ai_steals});
        ++run.episodes;
      }
    }
  }
  run.secs = seconds_since(t0);
  return run;
}

Outcome check_engine_invariants() {
  const auto& r = invariant_run();
  const auto& t = r.totals;
  const bool ok = t.engine_violations == 0 && t.replay_failures == 0 && r.episodes == 1000;
  return {ok, fmt("%d episodes of 180 s (%d ticks), %d engine violations, %d replay mismatches, %.0f s%s%s",
                  r.episodes, t.ticks, t.engine_violations, t.replay_failures, r.secs,
                  ok || t.first_failure.empty() ? "" : "; first: ", ok ? "" : t.first_failure.c_str())};
}

Outcome check_agent_invariants() {
  const auto& t = invariant_run().totals;
  const bool ok = t.agent_violations() == 0 && t.divide_checked > 0 && t.delay_checked > 0 &&
                  t.bottom_feeder_checked > 0;
  return {ok, fmt("omit-family %d, divide %d/%d, bottom_feeder %d/%d, delay %d/%d violations/checked%s%s",
                  t.omit_violations, t.divide_violations, t.divide_checked, t.bottom_feeder_mismatches,
                  t.bottom_feeder_checked, t.delay_violations, t.delay_checked,
                  ok || t.first_failure.empty() ? "" : "; first: ", ok ? "" : t.first_failure.c_str())};
}

Outcome check_directional() {
  const auto& r = invariant_run();
  std::map<AgentKind, std::vector<const EpisodeStats*>> by;
  for (const auto& s : r.stats) {
    if (s.density == 5) by[s.agent].push_back(&s);
  }
  const auto& ign = by[AgentKind::ignorant];
  const auto& om = by[AgentKind::omit];
  std::vector<double> diff;
  for (std::size_t i = 0; i < ign.size() && i < om.size(); ++i) diff.push_back(ign[i]->ai_steals - om[i]->ai_steals);
  const double n = static_cast<double>(diff.size());
  const double mean_diff = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  std::mt19937_64 gen(99);
  constexpr int kBoot = 20000;
  int not_greater = 0;
  for (int b = 0; b < kBoot; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) s += diff[gen() % diff.size()];
    if (s <= 0.0) ++not_greater;
  }
  const double p = (not_greater + 1.0) / (kBoot + 1.0);
  std::map<AgentKind, double> rel;
  for (const auto& [k, v] : by) {
    double s = 0;
    for (const auto* e : v) s += e->ai_rel;
    rel[k] = s / static_cast<double>(v.size());
  }
  const auto top = std::max_element(rel.begin(), rel.end(), [](auto& a, auto& b) { return a.second < b.second; });
  std::string rels;
  for (const auto& [k, v] : rel) rels += fmt(" %s=%.3f", std::string(to_string(k)).c_str(), v);
  const bool ok = diff.size() == 100 && mean_diff > 0 && p < 0.01 && top->first == AgentKind::ignorant;
  return {ok, fmt("steals ignorant-omit=%.2f per round, bootstrap p=%.5f; ai_rel:%s", mean_diff, p, rels.c_str())};
}

// --- preference model -----------------------------------------------------------

Outcome check_preference() {
  const auto t0 = Clock::now();
  const oracle::SyntheticModel model{0.0, {0.5, -0.3}};
  const auto names = oracle::synthetic_feature_names(2);
  int mean_misses = 0;
  std::array<int, 3> covered{};
  double worst_mean = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto rs = oracle::synthetic_choices(model, 5000, 500 + rep);
    const auto d = build_design(rs, names, true);
    FitConfig cfg;
    cfg.sampler.seed = 700 + rep;
    cfg.keep_draws = false;
    const auto s = fit(d, cfg);
    const auto truth = oracle::standardized_truth(model, d);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& c = s.coefficients[i];
      const double err = std::abs(c.mean - truth[i]);
      worst_mean = std::max(worst_mean, err);
      if (err > 0.1) ++mean_misses;
      if (c.ci_lower <= truth[i] && truth[i] <= c.ci_upper) ++covered[i];
    }
  }
  const auto rs = oracle::synthetic_choices(model, 5000, 9001);
  FitConfig cv_cfg;
  cv_cfg.sampler.seed = 5;
  const auto cv = cross_validate(rs, names, 10, 3, cv_cfg);
  const double bayes = oracle::bayes_rate(model);

  const auto coin = oracle::synthetic_choices(model, 2000, 77, true);
  const auto coin_cv = cross_validate(coin, names, 10, 4, cv_cfg);
  const auto coin_fit = fit(build_design(coin, names, true), cv_cfg);
  double max_bf = 0;
  for (const auto& c : coin_fit.coefficients) max_bf = std::max(max_bf, c.bf_inclusion);

  const double secs = seconds_since(t0);
  const int min_cover = *std::min_element(covered.begin(), covered.end());
  const bool ok = mean_misses == 0 && min_cover >= 18 && std::abs(cv.accuracy - bayes) <= 0.03 &&
                  std::abs(coin_cv.accuracy - 0.5) <= 0.05 && max_bf < 3.0 && secs < 600.0;
  return {ok, fmt("means max err %.3f (%d > 0.1); CI coverage %d/%d/%d of 20; CV acc %.4f vs Bayes %.4f; "
                  "coin-flip acc %.4f, max BF %.3f; %.0f s",
                  worst_mean, mean_misses, covered[0], covered[1], covered[2], cv.accuracy, bayes,
                  coin_cv.accuracy, max_bf, secs)};
}

Outcome check_binomial_bf() {
  bool ok = binomial_bf(1, 2) == 2.0 / 3.0 || std::abs(binomial_bf(1, 2) - 2.0 / 3.0) <= 1e-15;
  const double b1720 = binomial_bf(17, 20);
  ok = ok && std::abs(b1720 - 43.8) <= 0.1;
  double worst_sym = 0, worst_oracle = 0;
  for (int n = 0; n <= 50; ++n) {
    for (int k = 0; k <= n; ++k) {
      const double a = binomial_bf(k, n);
      worst_sym = std::max(worst_sym, std::abs(a - binomial_bf(n - k, n)) / a);
      worst_oracle = std::max(worst_oracle, std::abs(a - oracle::binomial_bf_products(k, n)) / a);
    }
  }
  ok = ok && worst_sym <= 1e-12 && worst_oracle <= 1e-10 && binomial_bf(0, 0) == 1.0;
  return {ok, fmt("bf(1,2)=%.17g, bf(17,20)=%.4f, max symmetry rel err %.1e, max product-oracle rel err %.1e",
                  binomial_bf(1, 2), b1720, worst_sym, worst_oracle)};
}

// --- end-to-end pipeline --------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

Outcome check_pipeline() {
#if defined(TEAMSIM_TOOL) && defined(TEAMSIM_PIPELINE) && defined(TEAMSIM_WORK_DIR)
  const auto t0 = Clock::now();
  const fs::path work = TEAMSIM_WORK_DIR;
  fs::remove_all(work);
  const std::string cmd = std::string("\"") + TEAMSIM_PIPELINE + "\" \"" + TEAMSIM_TOOL + "\" \"" + work.string() +
                          "\" > \"" + work.string() + ".log\" 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc != 0) return {false, fmt("pipeline script exited with %d; see %s.log", rc, work.string().c_str())};

  const auto rows = read_csv(work / "choices.csv");
  if (rows.size() < 2) return {false, "choices.csv has no rows"};
  const auto& header = rows[0];
  std::vector<std::string> skipped;
  const auto archives = load_sessions(work / "archive", &skipped);
  std::map<std::pair<std::string, int>, const SessionArchive*> by_key;
  for (const auto& a : archives) {
    by_key[{a.plan.participant_id, a.plan.blocks[0].density}] = &a;
    by_key[{a.plan.participant_id, a.plan.blocks[1].density}] = &a;
  }
  int cells = 0, mismatched = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto it = by_key.find({row[0], std::stoi(row[1])});
    if (it == by_key.end()) return {false, "row without an archive: " + row[0]};
    const auto& a = *it->second;
    const int block = a.plan.blocks[0].density == std::stoi(row[1]) ? 0 : 1;
    const auto tx = oracle::tally_log(a.rounds.at(block * 2));
    const auto ty = oracle::tally_log(a.rounds.at(block * 2 + 1));
    auto expect = [](const oracle::LogTally& t, const std::string& f) -> std::string {
      if (f == "human_score") return std::to_string(t.human_points);
      if (f == "ai_score") return std::to_string(t.ai_points);
      if (f == "score_inequality") return std::to_string(std::abs(t.human_points - t.ai_points));
      if (f == "ai_steals") return std::to_string(t.ai_steals);
      if (f == "intersections") return std::to_string(t.intersections);
      return "?";
    };
    for (std::size_t c = 5; c < header.size(); ++c) {
      const bool is_x = header[c].rfind("x_", 0) == 0;
      const std::string want = expect(is_x ? tx : ty, header[c].substr(2));
      ++cells;
      if (row.at(c) != want) ++mismatched;
    }
  }
  const bool coef = fs::exists(work / "coefficients.csv") && read_csv(work / "coefficients.csv").size() == 7;
  const bool metrics = fs::exists(work / "metrics.csv") && fs::exists(work / "simulate_metrics.csv");
  const double secs = seconds_since(t0);
  const bool ok = mismatched == 0 && cells > 0 && coef && metrics && skipped.empty();
  return {ok, fmt("%zu choice rows, %d feature cells, %d differ from recomputation; coefficients %s; %.1f s",
                  rows.size() - 1, cells, mismatched, coef ? "written" : "missing", secs)};
#else
  return {false, "built without the command-line tool"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"interception_solver", check_solver},
      {"planner_optimality", check_planner},
      {"value_distribution", check_values},
      {"engine_invariants", check_engine_invariants},
      {"agent_invariants", check_agent_invariants},
      {"directional_results", check_directional},
      {"preference_recovery", check_preference},
      {"binomial_bf", check_binomial_bf},
      {"headless_pipeline", check_pipeline},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %-20s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
