#include "teamsim/protocol.hpp"

#include <cmath>

namespace teamsim {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& client_message_types() {
  static const std::vector<std::string> types{"click", "click_center", "survey_submit", "choice_submit"};
  return types;
}

const std::vector<std::string>& server_message_types() {
  static const std::vector<std::string> types{"hello",          "state",          "round_end",
                                              "survey_request", "choice_request", "session_end",
                                              "error"};
  return types;
}

Frame error_frame(std::string_view message, std::optional<std::string> reopen) {
  Frame f{{"type", "error"}, {"message", message}};
  if (reopen) f["reopen"] = *reopen;
  return f;
}

void collect_strings(const Frame& frame, std::vector<std::string>& out) {
  if (frame.is_string()) {
    out.push_back(frame.get<std::string>());
  } else if (frame.is_object()) {
    for (const auto& [k, v] : frame.items()) {
      out.push_back(k);
      collect_strings(v, out);
    }
  } else if (frame.is_array()) {
    for (const auto& v : frame) collect_strings(v, out);
  }
}

LiveSession::LiveSession(std::string session_id, SessionPlan plan, std::uint64_t seed,
                         fs::path archive_dir, LiveOptions options)
    : session_id_(std::move(session_id)),
      plan_(std::move(plan)),
      seed_(seed),
      dir_(std::move(archive_dir)),
      options_(std::move(options)) {
  fs::create_directories(dir_);
  if (!fs::exists(dir_ / "plan.json")) write_json_file(dir_ / "plan.json", to_json(plan_));
}

std::vector<Frame> LiveSession::connect() {
  if (phase_ == LivePhase::playing) return {};
  return resume_point();
}

std::vector<Frame> LiveSession::resume_point() {
  for (int n = 1; n <= kRounds; ++n) {
    const int block = (n - 1) / kRoundsPerBlock + 1;
    if (!fs::exists(round_path(dir_, n))) return start_round(n);
    const bool block_end = n % kRoundsPerBlock == 0;
    if (!block_end) continue;
    round_ = n;
    if (!fs::exists(survey_path(dir_, block))) {
      phase_ = LivePhase::survey;
      form_block_ = block;
      return {survey_request(block)};
    }
    if (!fs::exists(choice_path(dir_, block))) {
      phase_ = LivePhase::choice;
      form_block_ = block;
      return {choice_request(block)};
    }
  }
  phase_ = LivePhase::done;
  return {Frame{{"type", "session_end"}}};
}

std::vector<Frame> LiveSession::start_round(int number) {
  round_ = number;
  runner_ = std::make_unique<EpisodeRunner>(
      round_spec(plan_, number, seed_, options_.engine, std::nullopt, options_.alpha));
  phase_ = LivePhase::playing;
  last_state_slot_ = -1;
  const auto ref = plan_.round(number);
  const auto& cfg = runner_->world().config();
  Frame hello{{"type", "hello"},
              {"protocol_version", kProtocolVersion},
              {"session_id", session_id_},
              {"round", number},
              {"block", ref.block + 1},
              {"display_identity", {{"name", ref.identity.name}, {"label", ref.identity.label}, {"color", ref.identity.color}}},
              {"arena_radius", cfg.arena.radius},
              {"density", cfg.density},
              {"round_length_s", cfg.round_length_s},
              {"state_hz", options_.state_hz},
              {"min_free_text", kMinFreeTextLength}};
  return {hello, state_frame()};
}

Frame LiveSession::state_frame() const {
  const World& w = runner_->world();
  json targets = json::array();
  for (const Target* t : w.visible_targets()) {
    targets.push_back({{"id", t->id}, {"x", t->pos.x}, {"y", t->pos.y}, {"value", t->value}});
  }
  auto avatar = [&](Player p) {
    const Avatar& a = w.avatar(p);
    return json{{"x", a.pos.x}, {"y", a.pos.y}, {"mark", a.mark ? json(*a.mark) : json(nullptr)}};
  };
  const int human = w.score(Player::human);
  const int ai = w.score(Player::ai);
  return Frame{{"type", "state"},
               {"t", w.clock()},
               {"targets", targets},
               {"human", avatar(Player::human)},
               {"ai", avatar(Player::ai)},
               {"scores", {{"human", human}, {"ai", ai}, {"team", human + ai}}}};
}

Frame LiveSession::survey_request(int block) const {
  const auto& ids = plan_.blocks[static_cast<std::size_t>(block - 1)].identities;
  json identities = json::array();
  for (const auto& id : ids) identities.push_back({{"name", id.name}, {"label", id.label}, {"color", id.color}});
  json items = json::array();
  for (const auto& text : survey_items()) items.push_back(text);
  return Frame{{"type", "survey_request"}, {"block", block}, {"items", items},
               {"identities", identities}, {"scale", {1, 7}}};
}

Frame LiveSession::choice_request(int block) const {
  const auto& ids = plan_.blocks[static_cast<std::size_t>(block - 1)].identities;
  json identities = json::array();
  for (const auto& id : ids) identities.push_back({{"name", id.name}, {"label", id.label}, {"color", id.color}});
  return Frame{{"type", "choice_request"}, {"block", block}, {"identities", identities},
               {"min_free_text", kMinFreeTextLength}};
}

std::vector<Frame> LiveSession::tick() {
  if (phase_ != LivePhase::playing) return {};
  runner_->step();
  std::vector<Frame> out;
  const World& w = runner_->world();
  const auto slot = static_cast<long>(std::floor(w.clock() * options_.state_hz + 1e-9));
  if (slot != last_state_slot_) {
    last_state_slot_ = slot;
    out.push_back(state_frame());
  }
  if (runner_->finished()) {
    save_log(round_path(dir_, round_), w.log());
    const int human = w.score(Player::human);
    const int ai = w.score(Player::ai);
    out.push_back(Frame{{"type", "round_end"},
                        {"round", round_},
                        {"scores", {{"human", human}, {"ai", ai}, {"team", human + ai}}}});
    runner_.reset();
    for (auto& f : advance_after_round()) out.push_back(std::move(f));
  }
  return out;
}

std::vector<Frame> LiveSession::advance_after_round() {
  phase_ = LivePhase::idle;
  return resume_point();
}

void LiveSession::disconnect() {
  if (phase_ != LivePhase::playing || !runner_) return;
  save_log(round_path(dir_, round_), runner_->world().log());
  runner_.reset();
  phase_ = LivePhase::idle;
}

std::vector<Frame> LiveSession::receive(std::string_view text) {
  Frame msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    return {error_frame("malformed frame")};
  }
  return handle(msg);
}

std::vector<Frame> LiveSession::handle(const Frame& msg) {
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return {error_frame("frame lacks a type")};
  }
  const auto type = msg["type"].get<std::string>();
  if (type == "click") {
    if (phase_ != LivePhase::playing) return {error_frame("not in a round")};
    if (!msg.contains("target_id") || !msg["target_id"].is_number_integer()) {
      return {error_frame("click requires an integer target_id")};
    }
    runner_->queue_human_click(ClickAction::target(msg["target_id"].get<int>()));
    return {};
  }
  if (type == "click_center") {
    if (phase_ != LivePhase::playing) return {error_frame("not in a round")};
    runner_->queue_human_click(ClickAction::center());
    return {};
  }
  if (type == "survey_submit") return on_survey(msg);
  if (type == "choice_submit") return on_choice(msg);
  return {error_frame("unknown message type '" + type + "'")};
}

std::vector<Frame> LiveSession::on_survey(const Frame& msg) {
  if (phase_ != LivePhase::survey) return {error_frame("no survey pending")};
  const auto& block = plan_.blocks[static_cast<std::size_t>(form_block_ - 1)];
  if (!msg.contains("ratings") || !msg["ratings"].is_object()) {
    return {error_frame("survey_submit requires ratings", "survey")};
  }
  json responses = json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& id = block.identities[i].name;
    if (!msg["ratings"].contains(id) || !msg["ratings"][id].is_object()) {
      return {error_frame("missing ratings for " + id, "survey")};
    }
    const auto& r = msg["ratings"][id];
    SurveyResponse resp;
    resp.participant_id = plan_.participant_id;
    resp.block = form_block_;
    resp.agent = block.agents[i];
    resp.identity = id;
    for (int q = 0; q < kSurveyItems; ++q) {
      const std::string key = "q" + std::to_string(q + 1);
      if (!r.contains(key) || !r[key].is_number_integer()) {
        return {error_frame("all eight items must be answered for " + id, "survey")};
      }
      const int v = r[key].get<int>();
      if (v < 1 || v > 7) return {error_frame(key + " must be between 1 and 7", "survey")};
      resp.answers[static_cast<std::size_t>(q)] = v;
    }
    responses.push_back(to_json(resp));
  }
  write_json_file(survey_path(dir_, form_block_), json{{"responses", responses}});
  phase_ = LivePhase::choice;
  return {choice_request(form_block_)};
}

std::vector<Frame> LiveSession::on_choice(const Frame& msg) {
  if (phase_ != LivePhase::choice) return {error_frame("no choice pending")};
  const auto& block = plan_.blocks[static_cast<std::size_t>(form_block_ - 1)];
  if (!msg.contains("identity") || !msg["identity"].is_string() || !msg.contains("free_text") ||
      !msg["free_text"].is_string()) {
    return {error_frame("choice_submit requires identity and free_text", "choice")};
  }
  const auto identity = msg["identity"].get<std::string>();
  const auto text = msg["free_text"].get<std::string>();
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < 2; ++i) {
    if (block.identities[i].name == identity) pick = i;
  }
  if (!pick) return {error_frame("unknown identity '" + identity + "'", "choice")};
  if (text.size() < kMinFreeTextLength) {
    return {error_frame("please write at least " + std::to_string(kMinFreeTextLength) + " characters", "choice")};
  }
  ChoiceEvent c;
  c.participant_id = plan_.participant_id;
  c.block = form_block_;
  c.identity = identity;
  c.agent = block.agents[*pick];
  c.free_text = text;
  write_json_file(choice_path(dir_, form_block_), to_json(c));
  phase_ = LivePhase::idle;
  return resume_point();
}

}  // namespace teamsim
