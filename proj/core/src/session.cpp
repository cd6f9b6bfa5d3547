#include "teamsim/session.hpp"

#include <algorithm>
#include <fstream>

#include "teamsim/metrics.hpp"
#include "teamsim/rng.hpp"

namespace teamsim {

using nlohmann::json;
namespace fs = std::filesystem;

const std::array<std::array<DisplayIdentity, 2>, 2>& display_identities() {
  static const std::array<std::array<DisplayIdentity, 2>, 2> ids{{
      {{{"green", "Green-Bot", "#2e9e44"}, {"purple", "Purple-Bot", "#7b3fb3"}}},
      {{{"copper", "Copper-Bot", "#b87333"}, {"blue", "Blue-Bot", "#2f5fd0"}}},
  }};
  return ids;
}

const std::array<std::string, kSurveyItems>& survey_items() {
  static const std::array<std::string, kSurveyItems> items{
      "The bot and I were a team.",
      "The bot was competent.",
      "I understood the bot's intentions.",
      "The bot understood my intentions.",
      "I contributed more to the team's performance.",
      "The bot was easy to play with.",
      "The bot was fun to play with.",
      "The bot and I had a similar playing style.",
  };
  return items;
}

SessionPlan::RoundRef SessionPlan::round(int number) const {
  if (number < 1 || number > kRounds) throw SessionError("round number out of range");
  RoundRef r;
  r.block = (number - 1) / kRoundsPerBlock;
  r.position = (number - 1) % kRoundsPerBlock;
  const auto& b = blocks[static_cast<std::size_t>(r.block)];
  r.density = b.density;
  r.agent = b.agents[static_cast<std::size_t>(r.position)];
  r.identity = b.identities[static_cast<std::size_t>(r.position)];
  return r;
}

SessionPlan make_schedule(const std::string& participant_id, std::array<AgentKind, 2> pair,
                          int counterbalance) {
  if (pair[0] == pair[1]) throw SessionError("agent pair must contain two different agents");
  if (counterbalance < 0 || counterbalance > 3) throw SessionError("counterbalance index must be in 0..3");
  SessionPlan plan;
  plan.participant_id = participant_id;
  plan.pair = pair;
  plan.counterbalance = counterbalance;
  const bool densities_swapped = (counterbalance & 1) != 0;
  const bool agents_swapped = (counterbalance & 2) != 0;
  const std::array<int, 2> densities = densities_swapped ? std::array{15, 5} : std::array{5, 15};
  const std::array<AgentKind, 2> order = agents_swapped ? std::array{pair[1], pair[0]} : pair;
  for (int b = 0; b < kBlocks; ++b) {
    auto& block = plan.blocks[static_cast<std::size_t>(b)];
    block.density = densities[static_cast<std::size_t>(b)];
    block.agents = order;
    block.identities = display_identities()[static_cast<std::size_t>(b)];
  }
  return plan;
}

bool SurveyResponse::placeholder() const {
  return std::all_of(answers.begin(), answers.end(), [](int a) { return a == 0; });
}

bool SurveyResponse::valid_likert() const {
  return std::all_of(answers.begin(), answers.end(), [](int a) { return a >= 1 && a <= 7; });
}

namespace {

json identity_json(const DisplayIdentity& id) {
  return json{{"name", id.name}, {"label", id.label}, {"color", id.color}};
}

DisplayIdentity identity_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("label").get<std::string>(),
          j.at("color").get<std::string>()};
}

}  // namespace

json to_json(const SessionPlan& plan) {
  json blocks = json::array();
  for (const auto& b : plan.blocks) {
    blocks.push_back({{"density", b.density},
                      {"agents", {to_string(b.agents[0]), to_string(b.agents[1])}},
                      {"identities", {identity_json(b.identities[0]), identity_json(b.identities[1])}}});
  }
  return json{{"format_version", 1},
              {"participant_id", plan.participant_id},
              {"pair", {to_string(plan.pair[0]), to_string(plan.pair[1])}},
              {"counterbalance", plan.counterbalance},
              {"blocks", blocks}};
}

SessionPlan plan_from_json(const json& j) {
  try {
    SessionPlan plan;
    plan.participant_id = j.at("participant_id").get<std::string>();
    plan.pair = {agent_kind_from_string(j.at("pair").at(0).get<std::string>()),
                 agent_kind_from_string(j.at("pair").at(1).get<std::string>())};
    plan.counterbalance = j.at("counterbalance").get<int>();
    const auto& blocks = j.at("blocks");
    if (blocks.size() != kBlocks) throw SessionError("plan must have two blocks");
    for (int b = 0; b < kBlocks; ++b) {
      const auto& jb = blocks.at(static_cast<std::size_t>(b));
      auto& block = plan.blocks[static_cast<std::size_t>(b)];
      block.density = jb.at("density").get<int>();
      for (std::size_t i = 0; i < 2; ++i) {
        block.agents[i] = agent_kind_from_string(jb.at("agents").at(i).get<std::string>());
        block.identities[i] = identity_from(jb.at("identities").at(i));
      }
    }
    return plan;
  } catch (const json::exception& ex) {
    throw SessionError(std::string("bad plan: ") + ex.what());
  }
}

json to_json(const SurveyResponse& r) {
  json answers = json::object();
  for (int i = 0; i < kSurveyItems; ++i) answers["q" + std::to_string(i + 1)] = r.answers[static_cast<std::size_t>(i)];
  return json{{"participant_id", r.participant_id}, {"block", r.block},
              {"agent", to_string(r.agent)},        {"identity", r.identity},
              {"answers", answers},                 {"placeholder", r.placeholder()}};
}

SurveyResponse survey_from_json(const json& j) {
  try {
    SurveyResponse r;
    r.participant_id = j.at("participant_id").get<std::string>();
    r.block = j.at("block").get<int>();
    r.agent = agent_kind_from_string(j.at("agent").get<std::string>());
    r.identity = j.at("identity").get<std::string>();
    for (int i = 0; i < kSurveyItems; ++i) {
      r.answers[static_cast<std::size_t>(i)] = j.at("answers").at("q" + std::to_string(i + 1)).get<int>();
    }
    return r;
  } catch (const json::exception& ex) {
    throw SessionError(std::string("bad survey response: ") + ex.what());
  }
}

json to_json(const ChoiceEvent& c) {
  return json{{"participant_id", c.participant_id}, {"block", c.block},
              {"identity", c.identity},             {"agent", to_string(c.agent)},
              {"free_text", c.free_text},           {"synthetic", c.synthetic}};
}

ChoiceEvent choice_from_json(const json& j) {
  try {
    ChoiceEvent c;
    c.participant_id = j.at("participant_id").get<std::string>();
    c.block = j.at("block").get<int>();
    c.identity = j.at("identity").get<std::string>();
    c.agent = agent_kind_from_string(j.at("agent").get<std::string>());
    c.free_text = j.at("free_text").get<std::string>();
    c.synthetic = j.value("synthetic", false);
    return c;
  } catch (const json::exception& ex) {
    throw SessionError(std::string("bad choice event: ") + ex.what());
  }
}

fs::path round_path(const fs::path& dir, int n) { return dir / ("round_" + std::to_string(n) + ".jsonl"); }
fs::path survey_path(const fs::path& dir, int k) { return dir / ("survey_block" + std::to_string(k) + ".json"); }
fs::path choice_path(const fs::path& dir, int k) { return dir / ("choice_block" + std::to_string(k) + ".json"); }

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw SessionError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SessionError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw SessionError(path.string() + ": " + ex.what());
  }
}

SessionArchive load_session(const fs::path& dir) {
  SessionArchive a;
  a.dir = dir;
  a.plan = plan_from_json(read_json_file(dir / "plan.json"));
  for (int n = 1; n <= kRounds; ++n) {
    const auto path = round_path(dir, n);
    if (!fs::exists(path)) {
      a.problems.push_back("missing " + path.filename().string());
      continue;
    }
    auto log = load_log(path);
    if (!log.complete()) {
      a.problems.push_back(path.filename().string() + " is incomplete");
    }
    a.rounds.push_back(std::move(log));
  }
  for (int k = 1; k <= kBlocks; ++k) {
    if (!fs::exists(survey_path(dir, k))) {
      a.problems.push_back("missing survey for block " + std::to_string(k));
    } else {
      const auto j = read_json_file(survey_path(dir, k));
      for (const auto& item : j.at("responses")) a.surveys.push_back(survey_from_json(item));
    }
    if (!fs::exists(choice_path(dir, k))) {
      a.problems.push_back("missing choice for block " + std::to_string(k));
    } else {
      a.choices.push_back(choice_from_json(read_json_file(choice_path(dir, k))));
    }
  }
  return a;
}

std::vector<SessionArchive> load_sessions(const fs::path& root, std::vector<std::string>* skipped) {
  std::vector<fs::path> dirs;
  if (fs::exists(root / "plan.json")) dirs.push_back(root);
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().filename() == "plan.json" &&
          entry.path().parent_path() != root) {
        dirs.push_back(entry.path().parent_path());
      }
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<SessionArchive> out;
  for (const auto& d : dirs) {
    auto a = load_session(d);
    if (!a.complete()) {
      if (skipped) {
        std::string msg = d.string() + ": incomplete (";
        for (std::size_t i = 0; i < a.problems.size(); ++i) msg += (i ? "; " : "") + a.problems[i];
        skipped->push_back(msg + ")");
      }
      continue;
    }
    out.push_back(std::move(a));
  }
  return out;
}

EpisodeSpec round_spec(const SessionPlan& plan, int round_number, std::uint64_t session_seed,
                       const EngineConfig& base, std::optional<HumanProxy> proxy, double alpha) {
  const auto ref = plan.round(round_number);
  EpisodeSpec spec;
  spec.engine = base;
  spec.engine.density = ref.density;
  spec.engine.seed = Rng::derive_seed(session_seed, static_cast<std::uint64_t>(round_number));
  spec.agent = ref.agent;
  spec.proxy = std::move(proxy);
  spec.proxy_seed = Rng::derive_seed(session_seed, 100 + static_cast<std::uint64_t>(round_number));
  spec.alpha = alpha;
  return spec;
}

SessionArchive run_session_headless(const SessionPlan& plan, std::uint64_t seed,
                                    const fs::path& dir, const HeadlessOptions& options) {
  fs::create_directories(dir);
  write_json_file(dir / "plan.json", to_json(plan));

  std::array<int, kRounds> team_points{};
  for (int n = 1; n <= kRounds; ++n) {
    EpisodeRunner runner(round_spec(plan, n, seed, options.engine, options.proxy, options.alpha));
    const auto& log = runner.run_to_end();
    save_log(round_path(dir, n), log);
    team_points[static_cast<std::size_t>(n - 1)] =
        runner.world().score(Player::human) + runner.world().score(Player::ai);
  }

  for (int k = 1; k <= kBlocks; ++k) {
    const auto& block = plan.blocks[static_cast<std::size_t>(k - 1)];
    json responses = json::array();
    for (std::size_t i = 0; i < 2; ++i) {
      SurveyResponse r;
      r.participant_id = plan.participant_id;
      r.block = k;
      r.agent = block.agents[i];
      r.identity = block.identities[i].name;
      r.answers.fill(0);
      responses.push_back(to_json(r));
    }
    write_json_file(survey_path(dir, k), json{{"responses", responses}});

    const int first = team_points[static_cast<std::size_t>((k - 1) * 2)];
    const int second = team_points[static_cast<std::size_t>((k - 1) * 2 + 1)];
    const std::size_t pick = second > first ? 1 : 0;
    ChoiceEvent c;
    c.participant_id = plan.participant_id;
    c.block = k;
    c.identity = block.identities[pick].name;
    c.agent = block.agents[pick];
    c.free_text = "synthetic choice: higher team score";
    c.synthetic = true;
    write_json_file(choice_path(dir, k), to_json(c));
  }
  return load_session(dir);
}

FeatureVector objective_features(const EpisodeLog& log) {
  const auto m = compute_metrics(log);
  return {{"human_score", m.human_points},
          {"ai_score", m.ai_points},
          {"score_inequality", m.score_inequality},
          {"ai_steals", m.ai_steals},
          {"intersections", m.intersections}};
}

ExportResult export_choices(const std::vector<SessionArchive>& archives, FeatureSet set) {
  ExportResult out;
  for (const auto& a : archives) {
    if (!a.complete()) {
      out.skipped.push_back(a.dir.string() + ": incomplete session");
      continue;
    }
    for (int k = 1; k <= kBlocks; ++k) {
      const auto& block = a.plan.blocks[static_cast<std::size_t>(k - 1)];
      const std::string where = a.plan.participant_id + " block " + std::to_string(k);
      auto choice = std::find_if(a.choices.begin(), a.choices.end(),
                                 [k](const ChoiceEvent& c) { return c.block == k; });
      if (choice == a.choices.end()) {
        out.skipped.push_back(where + ": missing choice");
        continue;
      }
      ChoiceRecord r;
      r.participant_id = a.plan.participant_id;
      r.density = block.density;
      r.agent_x = block.agents[0];
      r.agent_y = block.agents[1];
      r.chose_x = choice->identity == block.identities[0].name;

      try {
        if (set == FeatureSet::objective) {
          r.features_x = objective_features(a.rounds.at(static_cast<std::size_t>((k - 1) * 2)));
          r.features_y = objective_features(a.rounds.at(static_cast<std::size_t>((k - 1) * 2 + 1)));
        } else {
          std::array<FeatureVector*, 2> dest{&r.features_x, &r.features_y};
          for (std::size_t i = 0; i < 2; ++i) {
            auto s = std::find_if(a.surveys.begin(), a.surveys.end(), [&](const SurveyResponse& sr) {
              return sr.block == k && sr.identity == block.identities[i].name;
            });
            if (s == a.surveys.end()) throw SessionError("missing survey response");
            if (s->placeholder()) throw SessionError("survey is a headless placeholder");
            if (!s->valid_likert()) throw SessionError("survey answers outside 1..7");
            for (int q = 0; q < kSurveyItems; ++q) {
              (*dest[i])["q" + std::to_string(q + 1)] = s->answers[static_cast<std::size_t>(q)];
            }
          }
        }
      } catch (const std::exception& ex) {
        out.skipped.push_back(where + ": " + ex.what());
        continue;
      }
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace teamsim
