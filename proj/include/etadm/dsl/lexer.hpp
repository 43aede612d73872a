#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "etadm/error.hpp"

namespace etadm::dsl {

enum class TokenKind {
  BoolLit,
  IntLit,
  StrLit,
  Ident,
  LParen,
  RParen,
  Comma,
  Not,     // !
  AndAnd,  // &&
  OrOr,    // ||
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;  // identifier name or decoded string literal
  std::int64_t int_value = 0;
  bool bool_value = false;
  // Byte span [begin, end) in the source.
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Lex or parse failure with the byte offset where it was detected and, for
/// parse errors, the set of tokens that would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(ErrorCode code, std::size_t position, const std::string& message,
              std::vector<std::string> expected = {});

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

// Whitespace and `#` line comments are skipped.
std::vector<Token> tokenize(std::string_view source);

}  // namespace etadm::dsl
