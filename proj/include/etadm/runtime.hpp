#pragma once

// The event-trigger-action loop. Each turn starts from an external event;
// every mini-turn picks one winner action, executes it and feeds the events
// it emits back into the queue, until the policy has nothing more to do.

#include <climits>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etadm/features.hpp"
#include "etadm/model.hpp"
#include "etadm/rulebook.hpp"
#include "etadm/state.hpp"

namespace etadm {

enum class Policy { Rules, Model, Hybrid };

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view text);

inline constexpr std::size_t kMaxMiniTurns = 16;
// Rules at or above this priority preempt the model under the hybrid policy.
inline constexpr int kOverridePriority = 100;

struct MiniTurnTrace {
  std::int64_t mini_turn_index = 0;
  std::optional<std::string> event;  // consumed in this mini-turn, if any
  // Triggers that activated, when a rule decided.
  std::optional<std::vector<std::string>> activated;
  // Distribution over all actions, when the model decided.
  std::optional<std::vector<double>> probabilities;
  int chosen_action = 0;
  // State feature at decision time.
  std::vector<int> state_feature;
  std::string response;
  // The chosen action's template could not be rendered.
  bool render_failed = false;

  bool operator==(const MiniTurnTrace&) const = default;
};

struct TurnResult {
  std::int64_t turn_index = 0;
  std::string event;
  std::vector<int> winner_sequence;  // STOP excluded
  std::string response;
  bool truncated = false;
  std::vector<MiniTurnTrace> traces;

  bool operator==(const TurnResult&) const = default;
};

struct RuleChoice {
  int action_id = 0;
  Event event;
  std::vector<std::string> activated;  // declaration order
};

/// Dequeues events until one activates at least one trigger (events that
/// activate nothing are dropped) and returns the winner: highest priority,
/// then earliest declaration. Only triggers with priority >= min_priority
/// take part; MODEL triggers never do. None once the queue is drained.
std::optional<RuleChoice> step_mini_turn_rules(DialogueState& state, const Rulebook& rulebook,
                                               int min_priority = INT32_MIN);

/// Evaluates the triggers listening to one event without touching the queue.
std::optional<RuleChoice> choose_rule(const DialogueState& state, const Event& event,
                                      const Rulebook& rulebook, int min_priority = INT32_MIN);

struct ModelChoice {
  std::vector<double> probabilities;
  int action_id = 0;
};

/// Argmax of the model's distribution; ties go to the lowest action id.
ModelChoice step_mini_turn_model(const DialogueState& state, const FeatureVector& context,
                                 const ModelParams& params);

/// Receives a turn as it runs, in causal order.
class TurnObserver {
 public:
  virtual ~TurnObserver() = default;
  virtual void on_turn_start(const DialogueState& state, const Event& external,
                             const FeatureVector& context) = 0;
  virtual void on_mini_turn(const MiniTurnTrace& trace) = 0;
  virtual void on_turn_done(const TurnResult& result) = 0;
};

/// One conversation against a shared, immutable rulebook, database and
/// (optionally) model. Not thread-safe; distinct sessions are independent.
class DialogueSession {
 public:
  DialogueSession(std::shared_ptr<const Rulebook> rulebook, std::shared_ptr<const DomainDb> db,
                  std::shared_ptr<const ModelParams> model = nullptr,
                  std::shared_ptr<const ContextEncoder> encoder = nullptr,
                  std::string key = "session");

  /// Runs one turn. Throws ModelMissing for model/hybrid without a model.
  /// Leftover internal events are discarded when the turn ends.
  TurnResult run_turn(const Event& external, const SemanticFrame& frame,
                      std::string_view user_utterance, Policy policy,
                      TurnObserver* observer = nullptr);

  const DialogueState& state() const { return state_; }
  const std::vector<Utterance>& history() const { return history_; }
  const Rulebook& rulebook() const { return *rulebook_; }
  const std::shared_ptr<const ModelParams>& model() const { return model_; }
  const ContextEncoder& encoder() const { return *encoder_; }

  // Context feature for the next turn given the user's utterance.
  FeatureVector context_for(std::string_view user_utterance) const;

 private:
  std::shared_ptr<const Rulebook> rulebook_;
  std::shared_ptr<const DomainDb> db_;
  std::shared_ptr<const ModelParams> model_;
  std::shared_ptr<const ContextEncoder> encoder_;
  std::string key_;
  DialogueState state_;
  std::vector<Utterance> history_;
  std::size_t turns_run_ = 0;
};

/// Event a corpus or live turn maps to: the opening turn is Start, a
/// farewell intent is End, everything else is Query.
Event turn_event(std::size_t turn_position, const SemanticFrame& frame);

inline constexpr std::string_view kFarewellIntent = "bye";

}  // namespace etadm
