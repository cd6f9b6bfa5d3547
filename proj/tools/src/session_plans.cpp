#include "session_plans.hpp"

#include <set>

namespace teamsim::tools {

SessionPlanFile load_session_plan_file(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  SessionPlanFile file;
  std::filesystem::path root = j.value("archive_root", std::string{"archive"});
  if (root.is_relative()) root = path.parent_path() / root;
  file.archive_root = root;
  file.round_length_s = j.value("round_length_s", 180.0);
  if (!(file.round_length_s > 0.0)) throw SessionError("round_length_s must be positive");

  std::set<std::string> ids;
  std::set<std::string> participants;
  for (const auto& s : j.at("sessions")) {
    SessionEntry e;
    const auto participant = s.at("participant_id").get<std::string>();
    e.session_id = s.value("session_id", participant);
    const auto agents = s.at("agents").get<std::vector<std::string>>();
    if (agents.size() != 2) throw SessionError("session " + e.session_id + " needs two agents");
    e.plan = make_schedule(participant,
                           {agent_kind_from_string(agents[0]), agent_kind_from_string(agents[1])},
                           s.value("counterbalance", 0));
    e.seed = s.value("seed", std::uint64_t{0});
    e.dir = root / participant;
    if (!ids.insert(e.session_id).second) throw SessionError("duplicate session id " + e.session_id);
    if (!participants.insert(participant).second) {
      throw SessionError("duplicate participant " + participant);
    }
    file.sessions.push_back(std::move(e));
  }
  return file;
}

}  // namespace teamsim::tools
