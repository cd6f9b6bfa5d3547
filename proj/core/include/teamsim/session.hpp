#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsim/agents.hpp"
#include "teamsim/episode_log.hpp"
#include "teamsim/episode_runner.hpp"
#include "teamsim/preference.hpp"

namespace teamsim {

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DisplayIdentity {
  std::string name;   // e.g. "green"
  std::string label;  // e.g. "Green-Bot"
  std::string color;  // CSS hex
};

// Block 1 personas, then block 2, in play order within the block.
const std::array<std::array<DisplayIdentity, 2>, 2>& display_identities();

inline constexpr int kBlocks = 2;
inline constexpr int kRoundsPerBlock = 2;
inline constexpr int kRounds = kBlocks * kRoundsPerBlock;
inline constexpr int kSurveyItems = 8;
inline constexpr std::size_t kMinFreeTextLength = 10;

const std::array<std::string, kSurveyItems>& survey_items();

struct BlockPlan {
  int density = 5;
  std::array<AgentKind, 2> agents{};  // play order
  std::array<DisplayIdentity, 2> identities;
};

struct SessionPlan {
  std::string participant_id;
  std::array<AgentKind, 2> pair{};
  int counterbalance = 0;
  std::array<BlockPlan, kBlocks> blocks;

  struct RoundRef {
    int block = 0;     // 0-based
    int position = 0;  // 0 or 1 within the block
    int density = 5;
    AgentKind agent = AgentKind::ignorant;
    DisplayIdentity identity;
  };
  // Rounds are numbered 1..4 in play order.
  RoundRef round(int number) const;
};

// Counterbalance bit 0 picks the density order, bit 1 the agent order.
SessionPlan make_schedule(const std::string& participant_id, std::array<AgentKind, 2> pair,
                          int counterbalance);

struct SurveyResponse {
  std::string participant_id;
  int block = 1;  // 1-based
  AgentKind agent = AgentKind::ignorant;
  std::string identity;
  std::array<int, kSurveyItems> answers{};

  // Headless stubs carry 0 in every item, outside the 1..7 scale.
  bool placeholder() const;
  bool valid_likert() const;
};

struct ChoiceEvent {
  std::string participant_id;
  int block = 1;  // 1-based
  std::string identity;
  AgentKind agent = AgentKind::ignorant;
  std::string free_text;
  bool synthetic = false;
};

nlohmann::json to_json(const SessionPlan& plan);
SessionPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SurveyResponse& r);
SurveyResponse survey_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ChoiceEvent& c);
ChoiceEvent choice_from_json(const nlohmann::json& j);

// Archive layout, one directory per participant:
//   plan.json, round_<n>.jsonl, survey_block<k>.json, choice_block<k>.json
std::filesystem::path round_path(const std::filesystem::path& dir, int round_number);
std::filesystem::path survey_path(const std::filesystem::path& dir, int block);
std::filesystem::path choice_path(const std::filesystem::path& dir, int block);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

struct SessionArchive {
  std::filesystem::path dir;
  SessionPlan plan;
  std::vector<EpisodeLog> rounds;
  std::vector<SurveyResponse> surveys;  // two per block, block order
  std::vector<ChoiceEvent> choices;     // one per block
  std::vector<std::string> problems;    // empty iff complete

  bool complete() const { return problems.empty(); }
};

SessionArchive load_session(const std::filesystem::path& dir);
// Every session directory under `root`; incomplete ones are reported and skipped.
std::vector<SessionArchive> load_sessions(const std::filesystem::path& root,
                                          std::vector<std::string>* skipped = nullptr);

struct HeadlessOptions {
  EngineConfig engine;  // density and seed are overridden per round
  HumanProxy proxy;
  double alpha = 0.9;
};

EpisodeSpec round_spec(const SessionPlan& plan, int round_number, std::uint64_t session_seed,
                       const EngineConfig& base, std::optional<HumanProxy> proxy, double alpha);

// Plays all four rounds with the proxy and writes a complete archive with
// placeholder surveys and a synthetic choice (higher team score; ties go to
// the first-played agent).
SessionArchive run_session_headless(const SessionPlan& plan, std::uint64_t seed,
                                    const std::filesystem::path& session_dir,
                                    const HeadlessOptions& options = {});

struct ExportResult {
  std::vector<ChoiceRecord> records;
  std::vector<std::string> skipped;
};

// One record per (participant, block); x is the block's first-played agent.
ExportResult export_choices(const std::vector<SessionArchive>& archives, FeatureSet set);

FeatureVector objective_features(const EpisodeLog& log);

}  // namespace teamsim
