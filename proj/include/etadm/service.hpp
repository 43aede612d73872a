#pragma once

// Session lifecycle and trace fan-out behind the HTTP front end.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "etadm/runtime.hpp"

namespace etadm {

enum class TraceKind { Frame, MiniTurn, TurnDone };

std::string_view to_string(TraceKind kind);

struct TraceMessage {
  std::string session_id;
  std::int64_t turn_index = 0;
  TraceKind kind = TraceKind::Frame;
  nlohmann::json payload;

  // {"session_id", "turn_index", "kind", "payload"}
  nlohmann::json to_json() const;
};

/// Mailbox of one stream subscriber.
class Subscription {
 public:
  void push(TraceMessage message);
  // Waits up to `timeout`; nullopt on timeout or once closed and drained.
  std::optional<TraceMessage> pop(std::chrono::milliseconds timeout);
  // Everything queued right now, without waiting.
  std::vector<TraceMessage> drain();
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<TraceMessage> queue_;
  bool closed_ = false;
};

struct TranscriptEntry {
  std::string speaker;  // "usr" or "sys"
  std::string text;
};

class SessionManager {
 public:
  SessionManager(std::shared_ptr<const Rulebook> rulebook, std::shared_ptr<const DomainDb> db,
                 std::shared_ptr<const ModelParams> model = nullptr);

  struct Created {
    std::string id;
    TurnResult opening;
  };

  /// Runs the Start turn right away. ModelMissing when the policy needs a
  /// model and none is loaded.
  Created create_session(Policy policy);

  /// Without a frame the keyword extractor supplies one. UnknownSession,
  /// Busy while another turn on the same session is running.
  TurnResult post_turn(const std::string& id, const std::string& utterance,
                       const std::optional<SemanticFrame>& frame = std::nullopt);

  // JSON view: id, policy, created_at, transcript, turns, state.
  nlohmann::json session_json(const std::string& id) const;

  std::shared_ptr<Subscription> subscribe(const std::string& id);
  void unsubscribe(const std::string& id, const std::shared_ptr<Subscription>& sub);

  /// Validates against the rulebook, then swaps the snapshot used by
  /// sessions created afterwards.
  void set_model(std::shared_ptr<const ModelParams> model, std::string source = "");
  void load_model(const std::filesystem::path& path);
  std::shared_ptr<const ModelParams> model() const;
  nlohmann::json model_json() const;

  const Rulebook& rulebook() const { return *rulebook_; }
  const DomainDb& db() const { return *db_; }
  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    Policy policy = Policy::Rules;
    std::string created_at;
    std::unique_ptr<DialogueSession> dialogue;
    std::vector<TranscriptEntry> transcript;
    std::vector<nlohmann::json> turns;
    std::vector<std::shared_ptr<Subscription>> subscribers;
    std::mutex turn_mu;          // held while a turn runs
    mutable std::mutex data_mu;  // guards transcript, turns, subscribers, state reads
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  TurnResult run(Session& s, const Event& event, const SemanticFrame& frame, const std::string& utterance);

  std::shared_ptr<const Rulebook> rulebook_;
  std::shared_ptr<const DomainDb> db_;

  mutable std::mutex model_mu_;
  std::shared_ptr<const ModelParams> model_;
  std::string model_source_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  std::uint64_t id_salt_;
};

}  // namespace etadm
