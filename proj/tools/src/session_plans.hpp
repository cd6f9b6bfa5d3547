#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "teamsim/session.hpp"

namespace teamsim::tools {

// One participant entry of a sessions plan file.
struct SessionEntry {
  std::string session_id;
  SessionPlan plan;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
};

struct SessionPlanFile {
  std::filesystem::path archive_root;
  double round_length_s = 180.0;
  std::vector<SessionEntry> sessions;
};

// {"archive_root": "...", "round_length_s": 180,
//  "sessions": [{"session_id", "participant_id", "agents": [a, b],
//                "counterbalance", "seed"}]}
// A relative archive_root resolves against the plan file's directory.
SessionPlanFile load_session_plan_file(const std::filesystem::path& path);

}  // namespace teamsim::tools
