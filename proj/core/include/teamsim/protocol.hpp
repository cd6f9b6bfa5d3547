#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsim/episode_runner.hpp"
#include "teamsim/session.hpp"

namespace teamsim {

inline constexpr int kProtocolVersion = 1;

using Frame = nlohmann::json;

enum class LivePhase { idle, playing, survey, choice, done };

struct LiveOptions {
  EngineConfig engine;  // density and seed are set per round
  double state_hz = 15.0;
  double alpha = 0.9;
};

// Server side of one participant's live session. The transport feeds client
// frames to receive() and calls tick() once per simulation step; every frame
// returned must be sent to the client in order. Payloads carry display
// identities only, never agent kinds.
class LiveSession {
 public:
  LiveSession(std::string session_id, SessionPlan plan, std::uint64_t seed,
              std::filesystem::path archive_dir, LiveOptions options = {});

  // Resumes at the first unplayed round or pending form.
  std::vector<Frame> connect();
  std::vector<Frame> receive(std::string_view text);
  std::vector<Frame> handle(const Frame& message);
  std::vector<Frame> tick();
  // Aborts a round in progress; its partial log is archived without round_end.
  void disconnect();

  LivePhase phase() const { return phase_; }
  bool done() const { return phase_ == LivePhase::done; }
  int round_number() const { return round_; }
  double tick_interval() const { return options_.engine.dt; }
  const std::string& session_id() const { return session_id_; }
  const std::filesystem::path& archive_dir() const { return dir_; }

 private:
  std::vector<Frame> start_round(int number);
  std::vector<Frame> advance_after_round();
  std::vector<Frame> resume_point();
  Frame state_frame() const;
  Frame survey_request(int block) const;
  Frame choice_request(int block) const;
  std::vector<Frame> on_survey(const Frame& msg);
  std::vector<Frame> on_choice(const Frame& msg);
  int block_of_round() const { return (round_ - 1) / kRoundsPerBlock + 1; }

  std::string session_id_;
  SessionPlan plan_;
  std::uint64_t seed_;
  std::filesystem::path dir_;
  LiveOptions options_;
  LivePhase phase_ = LivePhase::idle;
  int round_ = 0;
  int form_block_ = 0;
  long last_state_slot_ = -1;
  std::unique_ptr<EpisodeRunner> runner_;
};

Frame error_frame(std::string_view message, std::optional<std::string> reopen = std::nullopt);

// Collects every string (keys and values) in a frame; used to audit payloads.
void collect_strings(const Frame& frame, std::vector<std::string>& out);

// Client-to-server frame kinds.
const std::vector<std::string>& client_message_types();
const std::vector<std::string>& server_message_types();

}  // namespace teamsim
