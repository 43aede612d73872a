#pragma once

#include <span>
#include <string>

#include "etadm/dsl/ast.hpp"
#include "etadm/state.hpp"

namespace etadm::dsl {

/// Evaluates a typechecked condition. `action_names` maps action ids to
/// names for `last_action(name)`. Total on input that passed typecheck
/// against the schema the state was built from.
bool evaluate(const Expr& expr, const DialogueState& state, const Event& event,
              std::span<const std::string> action_names = {});

}  // namespace etadm::dsl
