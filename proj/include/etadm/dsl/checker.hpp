#pragma once

#include <set>
#include <string>
#include <vector>

#include "etadm/dsl/ast.hpp"
#include "etadm/error.hpp"
#include "etadm/state.hpp"

namespace etadm::dsl {

enum class Type { Bool, Int, Str };

std::string_view to_string(Type type);

/// What a condition may refer to: declared state variables, known event
/// names, and action names (for `last_action`).
struct Schema {
  std::vector<VariableDecl> variables;
  std::set<std::string> events;
  std::vector<std::string> actions;

  const VariableDecl* find_variable(std::string_view name) const;
};

class TypeError : public Error {
 public:
  TypeError(std::size_t position, const std::string& message)
      : Error(ErrorCode::TypeError, "at offset " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Builtins: filled(slot), requested(slot), turns(), db_count(),
/// last_action(name). Slot and action arguments are bare identifiers.
Type type_of(const Expr& expr, const Schema& schema);

/// Throws TypeError unless the expression is well typed with a boolean root.
void typecheck(const Expr& expr, const Schema& schema);

}  // namespace etadm::dsl
