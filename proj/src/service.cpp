#include "etadm/service.hpp"

#include <cstdio>
#include <ctime>
#include <random>

#include "etadm/error.hpp"
#include "etadm/frame_extractor.hpp"
#include "etadm/serialization.hpp"

namespace etadm {

using nlohmann::json;

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::Frame: return "frame";
    case TraceKind::MiniTurn: return "mini_turn";
    case TraceKind::TurnDone: return "turn_done";
  }
  return "?";
}

json TraceMessage::to_json() const {
  return {{"session_id", session_id}, {"turn_index", turn_index}, {"kind", to_string(kind)}, {"payload", payload}};
}

void Subscription::push(TraceMessage message) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(message));
  }
  cv_.notify_all();
}

std::optional<TraceMessage> Subscription::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  TraceMessage m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

std::vector<TraceMessage> Subscription::drain() {
  std::lock_guard lock(mu_);
  std::vector<TraceMessage> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SessionManager::SessionManager(std::shared_ptr<const Rulebook> rulebook, std::shared_ptr<const DomainDb> db,
                               std::shared_ptr<const ModelParams> model)
    : rulebook_(std::move(rulebook)), db_(std::move(db)), id_salt_(std::random_device{}()) {
  if (!rulebook_ || !db_) throw Error(ErrorCode::InvalidArgument, "service needs a rulebook and a db");
  if (model) set_model(std::move(model));
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  return it->second;
}

namespace {

class FanOut final : public TurnObserver {
 public:
  FanOut(std::string id, std::vector<std::shared_ptr<Subscription>> subs, const Rulebook& rb)
      : id_(std::move(id)), subs_(std::move(subs)), rb_(rb) {}

  void on_turn_start(const DialogueState& state, const Event& external, const FeatureVector& context) override {
    turn_ = state.turn_index;
    send(TraceKind::Frame, {{"event", external.name},
                            {"frame", frame_to_json(state.frame)},
                            {"context_feature", context.values},
                            {"state", state_to_json(state, rb_)}});
  }
  void on_mini_turn(const MiniTurnTrace& trace) override {
    send(TraceKind::MiniTurn, mini_turn_to_json(trace, rb_));
  }
  void on_turn_done(const TurnResult& result) override {
    json summary = turn_to_json(result, rb_);
    summary.erase("traces");
    summary["mini_turns"] = result.traces.size();
    send(TraceKind::TurnDone, std::move(summary));
  }

 private:
  void send(TraceKind kind, json payload) {
    if (subs_.empty()) return;
    TraceMessage m{id_, turn_, kind, std::move(payload)};
    for (const auto& s : subs_) s->push(m);
  }

  std::string id_;
  std::vector<std::shared_ptr<Subscription>> subs_;
  const Rulebook& rb_;
  std::int64_t turn_ = 0;
};

}  // namespace

TurnResult SessionManager::run(Session& s, const Event& event, const SemanticFrame& frame,
                               const std::string& utterance) {
  std::vector<std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lock(s.data_mu);
    subs = s.subscribers;
  }
  FanOut fan(s.id, std::move(subs), *rulebook_);
  TurnResult result = s.dialogue->run_turn(event, frame, utterance, s.policy, &fan);

  json turn = turn_to_json(result, *rulebook_);
  turn["user_utterance"] = utterance;
  turn["frame"] = frame_to_json(frame);
  turn["state"] = state_to_json(s.dialogue->state(), *rulebook_);
  std::lock_guard lock(s.data_mu);
  if (!utterance.empty() || !s.turns.empty()) s.transcript.push_back({"usr", utterance});
  s.transcript.push_back({"sys", result.response});
  s.turns.push_back(std::move(turn));
  return result;
}

SessionManager::Created SessionManager::create_session(Policy policy) {
  auto model = this->model();
  if (policy != Policy::Rules && !model) {
    throw Error(ErrorCode::ModelMissing, std::string(to_string(policy)) + " policy needs a loaded model");
  }
  auto s = std::make_shared<Session>();
  {
    std::unique_lock lock(sessions_mu_);
    char buf[40];
    const std::uint64_t n = next_id_++;
    std::snprintf(buf, sizeof buf, "s%llu-%06llx", static_cast<unsigned long long>(n),
                  static_cast<unsigned long long>(mix64(n ^ id_salt_) & 0xffffff));
    s->id = buf;
  }
  s->policy = policy;
  s->created_at = now_iso8601();
  s->dialogue = std::make_unique<DialogueSession>(rulebook_, db_, policy == Policy::Rules ? nullptr : model,
                                                  nullptr, s->id);
  const SemanticFrame hello{"hello", {}, {}};
  TurnResult opening = run(*s, turn_event(0, hello), hello, "");
  {
    std::unique_lock lock(sessions_mu_);
    sessions_.emplace(s->id, s);
  }
  return {s->id, std::move(opening)};
}

TurnResult SessionManager::post_turn(const std::string& id, const std::string& utterance,
                                     const std::optional<SemanticFrame>& frame) {
  auto s = find(id);
  std::unique_lock turn_lock(s->turn_mu, std::try_to_lock);
  if (!turn_lock.owns_lock()) throw Error(ErrorCode::Busy, "session '" + id + "' is running a turn");
  const SemanticFrame f = frame ? *frame : extract_frame(utterance, *db_);
  std::size_t position;
  {
    std::lock_guard lock(s->data_mu);
    position = s->turns.size();
  }
  return run(*s, turn_event(position, f), f, utterance);
}

json SessionManager::session_json(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->data_mu);
  json transcript = json::array();
  for (const auto& e : s->transcript) transcript.push_back({{"speaker", e.speaker}, {"text", e.text}});
  return {{"id", s->id},
          {"policy", to_string(s->policy)},
          {"created_at", s->created_at},
          {"transcript", transcript},
          {"turns", s->turns},
          {"state", s->turns.empty() ? json(nullptr) : s->turns.back().at("state")}};
}

std::shared_ptr<Subscription> SessionManager::subscribe(const std::string& id) {
  auto s = find(id);
  auto sub = std::make_shared<Subscription>();
  std::lock_guard lock(s->data_mu);
  s->subscribers.push_back(sub);
  return sub;
}

void SessionManager::unsubscribe(const std::string& id, const std::shared_ptr<Subscription>& sub) {
  sub->close();
  std::shared_ptr<Session> s;
  try {
    s = find(id);
  } catch (const Error&) {
    return;
  }
  std::lock_guard lock(s->data_mu);
  std::erase(s->subscribers, sub);
}

void SessionManager::set_model(std::shared_ptr<const ModelParams> model, std::string source) {
  if (model) {
    model->validate();
    if (model->dims.n_actions != rulebook_->action_count()) {
      throw Error(ErrorCode::DimensionMismatch, "model predicts " + std::to_string(model->dims.n_actions) +
                                                    " actions, rulebook defines " +
                                                    std::to_string(rulebook_->action_count()));
    }
    if (!model->action_names.empty() && model->action_names != rulebook_->action_names()) {
      throw Error(ErrorCode::DimensionMismatch, "model action names differ from the rulebook's");
    }
  }
  std::lock_guard lock(model_mu_);
  model_ = std::move(model);
  model_source_ = std::move(source);
}

void SessionManager::load_model(const std::filesystem::path& path) {
  set_model(std::make_shared<const ModelParams>(etadm::load_model(path)), path.string());
}

std::shared_ptr<const ModelParams> SessionManager::model() const {
  std::lock_guard lock(model_mu_);
  return model_;
}

json SessionManager::model_json() const {
  std::shared_ptr<const ModelParams> m;
  std::string source;
  {
    std::lock_guard lock(model_mu_);
    m = model_;
    source = model_source_;
  }
  if (!m) return {{"loaded", false}};
  return {{"loaded", true},
          {"source", source},
          {"dims",
           {{"d_ctx", m->dims.d_ctx}, {"d_state", m->dims.d_state}, {"d_hidden", m->dims.d_hidden},
            {"n_actions", m->dims.n_actions}}},
          {"encoder", {{"kind", to_string(m->encoder.kind)}, {"dim", m->encoder.dim}}},
          {"action_names", m->action_names.empty() ? rulebook_->action_names() : m->action_names}};
}

std::size_t SessionManager::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

}  // namespace etadm
