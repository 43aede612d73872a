#include "etadm/runtime.hpp"

#include "etadm/dsl/eval.hpp"
#include "etadm/error.hpp"

namespace etadm {

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::Rules: return "rules";
    case Policy::Model: return "model";
    case Policy::Hybrid: return "hybrid";
  }
  return "?";
}

std::optional<Policy> parse_policy(std::string_view text) {
  if (text == "rules") return Policy::Rules;
  if (text == "model") return Policy::Model;
  if (text == "hybrid") return Policy::Hybrid;
  return std::nullopt;
}

Event turn_event(std::size_t turn_position, const SemanticFrame& frame) {
  if (turn_position == 0) return Event::external("Start");
  if (frame.intent == kFarewellIntent) return Event::external("End");
  return Event::external("Query");
}

std::optional<RuleChoice> choose_rule(const DialogueState& state, const Event& event,
                                      const Rulebook& rulebook, int min_priority) {
  std::optional<RuleChoice> choice;
  const TriggerRule* winner = nullptr;
  for (const auto& t : rulebook.triggers()) {
    if (t.is_model() || t.priority < min_priority || !t.listens_to(event.name)) continue;
    if (!dsl::evaluate(*t.condition, state, event, rulebook.action_names())) continue;
    if (!choice) choice = RuleChoice{0, event, {}};
    choice->activated.push_back(t.id);
    if (!winner || t.priority > winner->priority) winner = &t;
  }
  if (choice) choice->action_id = winner->action_id;
  return choice;
}

std::optional<RuleChoice> step_mini_turn_rules(DialogueState& state, const Rulebook& rulebook,
                                               int min_priority) {
  while (!state.event_queue.empty()) {
    Event event = std::move(state.event_queue.front());
    state.event_queue.pop_front();
    if (auto choice = choose_rule(state, event, rulebook, min_priority)) return choice;
  }
  return std::nullopt;
}

ModelChoice step_mini_turn_model(const DialogueState& state, const FeatureVector& context,
                                 const ModelParams& params) {
  ModelChoice out;
  out.probabilities = predict(context, encode_state(state), params);
  out.action_id = static_cast<int>(argmax(out.probabilities));
  return out;
}

DialogueSession::DialogueSession(std::shared_ptr<const Rulebook> rulebook,
                                 std::shared_ptr<const DomainDb> db,
                                 std::shared_ptr<const ModelParams> model,
                                 std::shared_ptr<const ContextEncoder> encoder, std::string key)
    : rulebook_(std::move(rulebook)),
      db_(std::move(db)),
      model_(std::move(model)),
      encoder_(std::move(encoder)),
      key_(std::move(key)) {
  if (!rulebook_ || !db_) throw Error(ErrorCode::InvalidArgument, "session needs a rulebook and a db");
  if (!encoder_) {
    encoder_ = ContextEncoder::create(model_ ? model_->encoder : ContextEncoderConfig{});
  }
  if (model_ && model_->dims.n_actions != rulebook_->action_count()) {
    throw Error(ErrorCode::DimensionMismatch, "model predicts " +
                                                  std::to_string(model_->dims.n_actions) +
                                                  " actions, rulebook defines " +
                                                  std::to_string(rulebook_->action_count()));
  }
  state_ = rulebook_->initial_state();
}

FeatureVector DialogueSession::context_for(std::string_view user_utterance) const {
  std::vector<Utterance> ctx = history_;
  ctx.push_back({"usr", std::string(user_utterance)});
  return encoder_->encode(ctx, turn_key(key_, turns_run_));
}

namespace {

std::vector<int> bits_of(const FeatureVector& v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0.0 ? 1 : 0;
  return out;
}

}  // namespace

TurnResult DialogueSession::run_turn(const Event& external, const SemanticFrame& frame,
                                     std::string_view user_utterance, Policy policy,
                                     TurnObserver* observer) {
  if (policy != Policy::Rules && !model_) {
    throw Error(ErrorCode::ModelMissing, std::string(to_string(policy)) + " policy needs a model");
  }
  const FeatureVector context = context_for(user_utterance);
  if (model_ && context.size() != model_->dims.d_ctx) {
    throw Error(ErrorCode::DimensionMismatch, "encoder and model disagree on d_ctx");
  }

  DialogueState state = reset_for_turn(state_, external, frame);
  if (observer) observer->on_turn_start(state, external, context);

  TurnResult result;
  result.turn_index = state.turn_index;
  result.event = external.name;
  std::vector<std::string> fragments;
  const Rulebook& rb = *rulebook_;

  // Picks the next action without executing it; nullopt ends the turn.
  auto decide = [&](DialogueState& s, MiniTurnTrace& trace) -> std::optional<int> {
    if (policy == Policy::Rules) {
      auto rule = step_mini_turn_rules(s, rb);
      if (!rule) return std::nullopt;
      trace.event = rule->event.name;
      trace.activated = std::move(rule->activated);
      return rule->action_id;
    }
    if (!s.event_queue.empty()) {
      Event event = std::move(s.event_queue.front());
      s.event_queue.pop_front();
      trace.event = event.name;
      if (policy == Policy::Hybrid) {
        if (auto rule = choose_rule(s, event, rb, kOverridePriority)) {
          trace.activated = std::move(rule->activated);
          return rule->action_id;
        }
      }
    }
    auto choice = step_mini_turn_model(s, context, *model_);
    trace.probabilities = std::move(choice.probabilities);
    return choice.action_id;
  };

  while (true) {
    MiniTurnTrace trace;
    trace.mini_turn_index = state.mini_turn_index;
    trace.state_feature = bits_of(encode_state(state));

    if (result.winner_sequence.size() == kMaxMiniTurns) {
      // Probe on a copy: truncated only if the policy still wanted to act.
      DialogueState probe = state;
      const auto next = decide(probe, trace);
      result.truncated = next && *next != rb.stop_id();
      break;
    }

    const auto chosen = decide(state, trace);
    if (!chosen) break;
    trace.chosen_action = *chosen;
    const ActionDef& action = rb.action(*chosen);
    if (action.is_stop()) {
      if (observer) observer->on_mini_turn(trace);
      result.traces.push_back(std::move(trace));
      break;
    }

    ActionOutcome outcome;
    try {
      outcome = apply_action(state, action, *db_);
    } catch (const Error& e) {
      // A learned policy may pick an action whose template has no values
      // yet; its state effects still apply.
      if (e.code() != ErrorCode::TemplateSlotMissing || policy == Policy::Rules) throw;
      ActionDef silent = action;
      silent.response_template.clear();
      outcome = apply_action(state, silent, *db_);
      trace.render_failed = true;
    }
    state = std::move(outcome.state);
    trace.response = outcome.response;
    if (!outcome.response.empty()) fragments.push_back(outcome.response);
    result.winner_sequence.push_back(*chosen);
    if (observer) observer->on_mini_turn(trace);
    result.traces.push_back(std::move(trace));
  }

  state.event_queue.clear();
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (i) result.response += " ";
    result.response += fragments[i];
  }

  state_ = std::move(state);
  history_.push_back({"usr", std::string(user_utterance)});
  history_.push_back({"sys", result.response});
  ++turns_run_;
  if (observer) observer->on_turn_done(result);
  return result;
}

}  // namespace etadm
