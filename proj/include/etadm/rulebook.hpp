#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etadm/dsl/ast.hpp"
#include "etadm/dsl/checker.hpp"
#include "etadm/state.hpp"

namespace etadm {

// Condition text that marks a trigger as handled by the learned policy.
inline constexpr std::string_view kModelCondition = "MODEL";

struct TriggerRule {
  std::string id;
  std::vector<std::string> listens;
  std::string condition_source;
  dsl::ExprPtr condition;  // null for MODEL triggers
  std::string action;
  int action_id = 0;
  int priority = 0;

  bool is_model() const { return condition == nullptr; }
  bool listens_to(std::string_view event) const;
};

/// Immutable set of variables, internal events, actions and triggers.
///
/// Invariants checked on construction: action ids are 0..A-1 in order, STOP
/// exists exactly once, has the highest id and does nothing; at most 12
/// other actions (one state-feature bit each); every mutation, emitted event,
/// template placeholder and trigger condition type-checks against the
/// declared variables and events.
class Rulebook {
 public:
  Rulebook(std::vector<VariableDecl> declared_variables, std::vector<std::string> internal_events,
           std::vector<ActionDef> actions, std::vector<TriggerRule> triggers);

  static Rulebook parse(std::string_view json_text);
  static Rulebook load(const std::filesystem::path& path);

  // Domain variables followed by the rulebook's own declarations.
  const std::vector<VariableDecl>& variables() const { return variables_; }
  const std::vector<std::string>& internal_events() const { return internal_events_; }
  const std::vector<ActionDef>& actions() const { return actions_; }
  const std::vector<TriggerRule>& triggers() const { return triggers_; }
  const std::vector<std::string>& action_names() const { return action_names_; }
  const dsl::Schema& schema() const { return schema_; }

  std::size_t action_count() const { return actions_.size(); }
  const ActionDef& action(int id) const;
  std::optional<int> find_action(std::string_view name) const;
  int stop_id() const { return static_cast<int>(actions_.size()) - 1; }

  DialogueState initial_state() const { return DialogueState::initial(variables_); }

 private:
  std::vector<VariableDecl> variables_;
  std::vector<std::string> internal_events_;
  std::vector<ActionDef> actions_;
  std::vector<TriggerRule> triggers_;
  std::vector<std::string> action_names_;
  dsl::Schema schema_;
};

// Maximum number of non-STOP actions, fixed by the state-feature layout.
inline constexpr std::size_t kMaxDialogueActions = 12;

}  // namespace etadm
