#include "etadm/dsl/lexer.hpp"

#include <limits>

namespace etadm::dsl {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::BoolLit: return "boolean literal";
    case TokenKind::IntLit: return "integer literal";
    case TokenKind::StrLit: return "string literal";
    case TokenKind::Ident: return "identifier";
    case TokenKind::LParen: return "(";
    case TokenKind::RParen: return ")";
    case TokenKind::Comma: return ",";
    case TokenKind::Not: return "!";
    case TokenKind::AndAnd: return "&&";
    case TokenKind::OrOr: return "||";
    case TokenKind::EqEq: return "==";
    case TokenKind::NotEq: return "!=";
    case TokenKind::Lt: return "<";
    case TokenKind::Le: return "<=";
    case TokenKind::Gt: return ">";
    case TokenKind::Ge: return ">=";
  }
  return "?";
}

SyntaxError::SyntaxError(ErrorCode code, std::size_t position, const std::string& message,
                         std::vector<std::string> expected)
    : Error(code, "at offset " + std::to_string(position) + ": " + message),
      position_(position),
      expected_(std::move(expected)) {}

namespace {

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

[[noreturn]] void lex_error(std::size_t pos, const std::string& msg) {
  throw SyntaxError(ErrorCode::LexError, pos, msg);
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto emit = [&](TokenKind kind, std::size_t begin, std::size_t end) {
    out.push_back(Token{kind, {}, 0, false, begin, end});
  };

  while (i < n) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(src[i])) ++i;
      std::string word(src.substr(start, i - start));
      if (word == "true" || word == "false") {
        out.push_back(Token{TokenKind::BoolLit, word, 0, word == "true", start, i});
      } else {
        out.push_back(Token{TokenKind::Ident, std::move(word), 0, false, start, i});
      }
      continue;
    }
    if (is_digit(c)) {
      std::int64_t value = 0;
      constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
      while (i < n && is_digit(src[i])) {
        const int d = src[i] - '0';
        if (value > (kMax - d) / 10) lex_error(start, "integer literal out of range");
        value = value * 10 + d;
        ++i;
      }
      if (i < n && is_ident_start(src[i])) lex_error(i, "malformed integer literal");
      Token t{TokenKind::IntLit, std::string(src.substr(start, i - start)), value, false, start, i};
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < n) {
        const char d = src[i];
        if (d == '"') {
          closed = true;
          ++i;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (i + 1 >= n) break;
          const char e = src[i + 1];
          switch (e) {
            case '"': text.push_back('"'); break;
            case '\\': text.push_back('\\'); break;
            case 'n': text.push_back('\n'); break;
            case 't': text.push_back('\t'); break;
            default: lex_error(i, "unknown escape sequence");
          }
          i += 2;
          continue;
        }
        text.push_back(d);
        ++i;
      }
      if (!closed) lex_error(start, "unterminated string literal");
      out.push_back(Token{TokenKind::StrLit, std::move(text), 0, false, start, i});
      continue;
    }
    const char next = i + 1 < n ? src[i + 1] : '\0';
    switch (c) {
      case '(': emit(TokenKind::LParen, i, i + 1); ++i; continue;
      case ')': emit(TokenKind::RParen, i, i + 1); ++i; continue;
      case ',': emit(TokenKind::Comma, i, i + 1); ++i; continue;
      case '!':
        if (next == '=') {
          emit(TokenKind::NotEq, i, i + 2);
          i += 2;
        } else {
          emit(TokenKind::Not, i, i + 1);
          ++i;
        }
        continue;
      case '&':
        if (next != '&') lex_error(i, "expected '&&'");
        emit(TokenKind::AndAnd, i, i + 2);
        i += 2;
        continue;
      case '|':
        if (next != '|') lex_error(i, "expected '||'");
        emit(TokenKind::OrOr, i, i + 2);
        i += 2;
        continue;
      case '=':
        if (next != '=') lex_error(i, "expected '=='");
        emit(TokenKind::EqEq, i, i + 2);
        i += 2;
        continue;
      case '<':
        if (next == '=') {
          emit(TokenKind::Le, i, i + 2);
          i += 2;
        } else {
          emit(TokenKind::Lt, i, i + 1);
          ++i;
        }
        continue;
      case '>':
        if (next == '=') {
          emit(TokenKind::Ge, i, i + 2);
          i += 2;
        } else {
          emit(TokenKind::Gt, i, i + 1);
          ++i;
        }
        continue;
      default:
        lex_error(i, "unexpected character");
    }
  }
  return out;
}

}  // namespace etadm::dsl
