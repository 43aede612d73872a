#pragma once

#include <string>
#include <string_view>

#include "etadm/dsl/ast.hpp"
#include "etadm/dsl/lexer.hpp"

namespace etadm::dsl {

/// Parses a condition. Precedence from loosest to tightest binding:
/// `||`, `&&`, `!`, comparison, primary. Comparisons do not chain, so
/// `a < b < c` is rejected. `event == Name` (and `!=`) produces EventIs.
///
/// Throws SyntaxError with ErrorCode::LexError or ErrorCode::ParseError and
/// never anything else, whatever the input bytes.
ExprPtr parse(std::string_view source);

/// Fully parenthesized canonical text of an expression; parse(format(e)) is
/// structurally equal to e for every tree with nonnegative integer literals.
std::string format(const Expr& expr);
inline std::string format(const ExprPtr& expr) { return format(*expr); }

}  // namespace etadm::dsl
