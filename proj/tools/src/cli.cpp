#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "server.hpp"
#include "session_plans.hpp"
#include "teamsim/episode_runner.hpp"
#include "teamsim/metrics.hpp"
#include "teamsim/preference.hpp"

namespace teamsim::tools {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string episode_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%04d.jsonl", index);
  return buf;
}

std::vector<fs::path> jsonl_files(const fs::path& in) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(in)) {
    files.push_back(in);
    return files;
  }
  if (!fs::is_directory(in)) throw std::runtime_error("no such file or directory: " + in.string());
  for (const auto& entry : fs::recursive_directory_iterator(in)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

std::vector<ChoiceRecord> load_choices(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_choices_csv(in);
}

struct SimulateArgs {
  std::string agent = "omit";
  std::string proxy = "greedy";
  int density = 5;
  std::uint64_t seed = 0;
  int episodes = 1;
  double round_length = 180.0;
  fs::path out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  fs::create_directories(a.out);
  HumanProxy proxy;
  proxy.kind = proxy_kind_from_string(a.proxy);
  for (int i = 0; i < a.episodes; ++i) {
    EpisodeSpec spec;
    spec.engine.density = a.density;
    spec.engine.round_length_s = a.round_length;
    spec.engine.seed = Rng::derive_seed(a.seed, static_cast<std::uint64_t>(i));
    spec.agent = agent_kind_from_string(a.agent);
    spec.proxy = proxy;
    spec.proxy_seed = Rng::derive_seed(a.seed, 100000 + static_cast<std::uint64_t>(i));
    EpisodeRunner runner(spec);
    const auto& log = runner.run_to_end();
    const auto path = a.out / episode_name(i);
    save_log(path, log);
    out << path.string() << " human=" << runner.world().score(Player::human)
        << " ai=" << runner.world().score(Player::ai) << '\n';
  }
  return 0;
}

int cmd_metrics(const fs::path& in, const fs::path& out_path, std::ostream& out, std::ostream& err) {
  std::vector<MetricsRow> rows;
  int skipped = 0;
  for (const auto& file : jsonl_files(in)) {
    const auto log = load_log(file);
    if (!log.complete()) {
      err << "skipping incomplete round " << file.string() << '\n';
      ++skipped;
      continue;
    }
    rows.push_back(compute_metrics(log));
  }
  auto f = open_out(out_path);
  write_metrics_csv(f, rows);
  out << "wrote " << rows.size() << " rows to " << out_path.string();
  if (skipped > 0) out << " (" << skipped << " incomplete skipped)";
  out << '\n';
  return 0;
}

struct FitArgs {
  fs::path choices;
  std::string features = "objective";
  int folds = 10;
  std::uint64_t seed = 0;
  double prior_sd = 1.0;
  fs::path out;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto records = load_choices(a.choices);
  const auto set = feature_set_from_string(a.features);
  FitConfig cfg;
  cfg.prior_sd = a.prior_sd;
  cfg.sampler.seed = a.seed;
  const auto design = build_design(records, set, true);
  for (const auto& w : design.warnings) err << "warning: " << w << '\n';
  const auto summary = fit(design, cfg);
  auto f = open_out(a.out);
  write_coefficients_csv(f, summary);
  out << "records=" << records.size() << " features=" << a.features
      << " acceptance=" << fixed(summary.acceptance_rate, 3) << '\n';
  for (const auto& c : summary.coefficients) {
    out << c.name << " mean=" << fixed(c.mean, 4) << " sd=" << fixed(c.sd, 4) << " ci=["
        << fixed(c.ci_lower, 4) << ", " << fixed(c.ci_upper, 4) << "] bf_inclusion=" << c.bf_inclusion
        << " (" << interpret_bf(c.bf_inclusion) << ")\n";
  }
  if (a.folds >= 2) {
    const auto cv = cross_validate(records, feature_names(set), a.folds, a.seed, cfg);
    out << "cv folds=" << a.folds << " accuracy=" << fixed(cv.accuracy, 4) << " auc=" << fixed(cv.auc, 4) << '\n';
  }
  return 0;
}

int cmd_binomial_bf(int k, int n, std::ostream& out) {
  const double bf = binomial_bf(k, n);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", bf);
  out << "k=" << k << " n=" << n << " bf10=" << buf << " (" << interpret_bf(bf) << ")\n";
  return 0;
}

int cmd_replay(const fs::path& path, std::ostream& out, std::ostream& err) {
  const auto log = load_log(path);
  try {
    const World w = replay(log);
    out << "replay ok: " << log.events.size() << " events, human=" << w.score(Player::human)
        << " ai=" << w.score(Player::ai);
    if (!log.complete()) out << " (incomplete round, replayed to t=" << fixed(w.clock(), 2) << ")";
    out << '\n';
    return 0;
  } catch (const ReplayDivergence& e) {
    err << e.what() << '\n';
    return 1;
  }
}

struct RunSessionArgs {
  fs::path sessions_file;
  std::string participant = "p001";
  std::vector<std::string> agents{"ignorant", "omit"};
  int counterbalance = 0;
  std::uint64_t seed = 0;
  std::string proxy = "greedy";
  double round_length = 180.0;
  fs::path out = "archive";
};

int cmd_run_session(const RunSessionArgs& a, std::ostream& out) {
  HeadlessOptions opts;
  opts.proxy.kind = proxy_kind_from_string(a.proxy);
  std::vector<SessionEntry> entries;
  if (!a.sessions_file.empty()) {
    auto file = load_session_plan_file(a.sessions_file);
    opts.engine.round_length_s = file.round_length_s;
    entries = std::move(file.sessions);
  } else {
    if (a.agents.size() != 2) throw std::invalid_argument("--agents takes two agent kinds");
    opts.engine.round_length_s = a.round_length;
    SessionEntry e;
    e.session_id = a.participant;
    e.plan = make_schedule(a.participant,
                           {agent_kind_from_string(a.agents[0]), agent_kind_from_string(a.agents[1])},
                           a.counterbalance);
    e.seed = a.seed;
    e.dir = a.out / a.participant;
    entries.push_back(std::move(e));
  }
  for (const auto& e : entries) {
    const auto archive = run_session_headless(e.plan, e.seed, e.dir, opts);
    out << e.dir.string() << " rounds=" << archive.rounds.size();
    for (const auto& c : archive.choices) out << " block" << c.block << "=" << c.identity;
    out << '\n';
  }
  return 0;
}

int cmd_export(const fs::path& in, const std::string& features, const fs::path& out_path,
               std::ostream& out, std::ostream& err) {
  std::vector<std::string> skipped;
  const auto archives = load_sessions(in, &skipped);
  const auto set = feature_set_from_string(features);
  auto result = export_choices(archives, set);
  for (const auto& s : skipped) err << "skipped session: " << s << '\n';
  for (const auto& s : result.skipped) err << "skipped row: " << s << '\n';
  auto f = open_out(out_path);
  write_choices_csv(f, result.records, feature_names(set));
  out << "wrote " << result.records.size() << " choice rows from " << archives.size() << " sessions to "
      << out_path.string() << '\n';
  return 0;
}

int cmd_preference_matrix(const fs::path& choices, std::ostream& out) {
  const auto records = load_choices(choices);
  out << "density,row,col,row_chosen,comparisons,percent,bf10,evidence\n";
  for (const auto& p : preference_matrix(records)) {
    out << p.density << ',' << to_string(p.row) << ',' << to_string(p.col) << ',' << p.row_chosen << ','
        << p.comparisons << ',' << fixed(p.percent, 2) << ',' << fixed(p.bf10, 4) << ',' << interpret_bf(p.bf10)
        << '\n';
  }
  return 0;
}

int cmd_serve(const fs::path& plan_file, unsigned short port, const std::string& bind, double time_scale,
              std::ostream& out) {
  ServerOptions opts;
  opts.port = port;
  opts.bind_address = bind;
  opts.time_scale = time_scale;
  Server server(load_session_plan_file(plan_file), opts);
  out << "listening on ws://" << bind << ':' << server.port() << "/session/<id>" << std::endl;
  server.run();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collaborative interception game: simulation, metrics and preference analysis", "teamsim"};
  app.require_subcommand(1);
  const auto agent_names = [] {
    std::vector<std::string> v;
    for (auto k : kAllAgentKinds) v.emplace_back(to_string(k));
    return v;
  }();
  const std::vector<std::string> proxy_names{"greedy", "random", "idle"};
  const std::vector<std::string> feature_sets{"objective", "subjective"};

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Play headless rounds of an agent with a scripted human proxy");
  simulate->add_option("--agent", sim.agent)->check(CLI::IsMember(agent_names))->capture_default_str();
  simulate->add_option("--proxy", sim.proxy)->check(CLI::IsMember(proxy_names))->capture_default_str();
  simulate->add_option("--density", sim.density)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--episodes", sim.episodes)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--round-length", sim.round_length, "seconds")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--out", sim.out)->required();

  fs::path metrics_in, metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Compute per-round metrics from episode logs");
  metrics->add_option("--in", metrics_in, "log file or directory (searched recursively)")->required();
  metrics->add_option("--out", metrics_out)->required();

  FitArgs fa;
  auto* fitp = app.add_subcommand("fit-preference", "Fit the Bayesian pairwise preference model");
  fitp->add_option("--choices", fa.choices)->required()->check(CLI::ExistingFile);
  fitp->add_option("--features", fa.features)->check(CLI::IsMember(feature_sets))->capture_default_str();
  fitp->add_option("--folds", fa.folds, "cross-validation folds; below 2 skips CV")->capture_default_str();
  fitp->add_option("--seed", fa.seed)->capture_default_str();
  fitp->add_option("--prior-sd", fa.prior_sd)->check(CLI::PositiveNumber)->capture_default_str();
  fitp->add_option("--out", fa.out)->required();

  int bk = 0, bn = 0;
  auto* bbf = app.add_subcommand("binomial-bf", "Bayes factor for a choice proportion against 0.5");
  bbf->add_option("--k", bk)->required()->check(CLI::NonNegativeNumber);
  bbf->add_option("--n", bn)->required()->check(CLI::NonNegativeNumber);

  fs::path serve_plan;
  unsigned short serve_port = 8080;
  std::string serve_bind = "127.0.0.1";
  double time_scale = 1.0;
  auto* serve = app.add_subcommand("serve", "Run live sessions over WebSocket");
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--sessions", serve_plan, "sessions plan file")->required()->check(CLI::ExistingFile);
  serve->add_option("--bind", serve_bind)->capture_default_str();
  serve->add_option("--time-scale", time_scale)->check(CLI::PositiveNumber)->capture_default_str();

  fs::path replay_log;
  auto* rep = app.add_subcommand("replay", "Re-simulate a log and verify it reproduces exactly");
  rep->add_option("--log", replay_log)->required()->check(CLI::ExistingFile);

  RunSessionArgs rs;
  auto* run_session = app.add_subcommand("run-session", "Play full headless sessions into an archive");
  run_session->add_option("--sessions", rs.sessions_file, "sessions plan file")->check(CLI::ExistingFile);
  run_session->add_option("--participant", rs.participant)->capture_default_str();
  run_session->add_option("--agents", rs.agents)->delimiter(',')->expected(2)->check(CLI::IsMember(agent_names));
  run_session->add_option("--counterbalance", rs.counterbalance)->check(CLI::Range(0, 3))->capture_default_str();
  run_session->add_option("--seed", rs.seed)->capture_default_str();
  run_session->add_option("--proxy", rs.proxy)->check(CLI::IsMember(proxy_names))->capture_default_str();
  run_session->add_option("--round-length", rs.round_length)->check(CLI::PositiveNumber)->capture_default_str();
  run_session->add_option("--out", rs.out, "archive root")->capture_default_str();

  fs::path export_in, export_out;
  std::string export_features = "objective";
  auto* exportc = app.add_subcommand("export-choices", "Build the choice CSV from session archives");
  exportc->add_option("--in", export_in, "archive root")->required()->check(CLI::ExistingDirectory);
  exportc->add_option("--features", export_features)->check(CLI::IsMember(feature_sets))->capture_default_str();
  exportc->add_option("--out", export_out)->required();

  fs::path matrix_choices;
  auto* matrix = app.add_subcommand("preference-matrix", "Pairwise choice percentages with Bayes factors");
  matrix->add_option("--choices", matrix_choices)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*metrics) return cmd_metrics(metrics_in, metrics_out, out, err);
    if (*fitp) return cmd_fit(fa, out, err);
    if (*bbf) return cmd_binomial_bf(bk, bn, out);
    if (*serve) return cmd_serve(serve_plan, serve_port, serve_bind, time_scale, out);
    if (*rep) return cmd_replay(replay_log, out, err);
    if (*run_session) return cmd_run_session(rs, out);
    if (*exportc) return cmd_export(export_in, export_features, export_out, out, err);
    if (*matrix) return cmd_preference_matrix(matrix_choices, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace teamsim::tools
