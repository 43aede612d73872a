#include "etadm/dsl/parser.hpp"

#include <optional>

namespace etadm::dsl {

namespace {

constexpr int kMaxDepth = 200;

const std::vector<std::string> kOperandStart = {"(", "identifier", "boolean literal",
                                                "integer literal", "string literal"};

std::optional<CmpOp> cmp_op(TokenKind kind) {
  switch (kind) {
    case TokenKind::EqEq: return CmpOp::Eq;
    case TokenKind::NotEq: return CmpOp::Ne;
    case TokenKind::Lt: return CmpOp::Lt;
    case TokenKind::Le: return CmpOp::Le;
    case TokenKind::Gt: return CmpOp::Gt;
    case TokenKind::Ge: return CmpOp::Ge;
    default: return std::nullopt;
  }
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::size_t source_size)
      : tokens_(std::move(tokens)), source_size_(source_size) {}

  ExprPtr parse_all() {
    ExprPtr e = parse_or();
    if (!at_end()) {
      if (cmp_op(peek().kind)) {
        fail("comparison operators are non-associative", {"&&", "||", "end of input"});
      }
      fail("unexpected " + std::string(to_string(peek().kind)), {"&&", "||", "end of input"});
    }
    return e;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }
  bool check(TokenKind kind) const { return !at_end() && peek().kind == kind; }
  std::size_t here() const { return at_end() ? source_size_ : peek().begin; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    throw SyntaxError(ErrorCode::ParseError, here(), msg, std::move(expected));
  }

  void enter() {
    if (++depth_ > kMaxDepth) fail("expression nested too deeply", {});
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (check(TokenKind::OrOr)) {
      const std::size_t at = peek().begin;
      ++pos_;
      ExprPtr rhs = parse_and();
      lhs = make(Or{std::move(lhs), std::move(rhs)}, at);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (check(TokenKind::AndAnd)) {
      const std::size_t at = peek().begin;
      ++pos_;
      ExprPtr rhs = parse_not();
      lhs = make(And{std::move(lhs), std::move(rhs)}, at);
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (check(TokenKind::Not)) {
      const std::size_t at = peek().begin;
      ++pos_;
      enter();
      ExprPtr operand = parse_not();
      --depth_;
      return make(Not{std::move(operand)}, at);
    }
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_primary();
    if (at_end()) return lhs;
    const auto op = cmp_op(peek().kind);
    if (!op) return lhs;
    const std::size_t at = peek().begin;
    ++pos_;
    ExprPtr rhs = parse_primary();
    if (!at_end() && cmp_op(peek().kind)) {
      fail("comparison operators are non-associative", {"&&", "||", ")", "end of input"});
    }
    const auto* lv = std::get_if<VarRef>(&lhs->node);
    const auto* rv = std::get_if<VarRef>(&rhs->node);
    if (lv && lv->name == "event" && rv && (*op == CmpOp::Eq || *op == CmpOp::Ne)) {
      ExprPtr is = make(EventIs{rv->name}, lhs->position);
      return *op == CmpOp::Eq ? is : make(Not{std::move(is)}, lhs->position);
    }
    return make(Cmp{*op, std::move(lhs), std::move(rhs)}, at);
  }

  ExprPtr parse_primary() {
    if (at_end()) fail("unexpected end of input", kOperandStart);
    const Token& tok = peek();
    switch (tok.kind) {
      case TokenKind::BoolLit: ++pos_; return make(BoolLit{tok.bool_value}, tok.begin);
      case TokenKind::IntLit: ++pos_; return make(IntLit{tok.int_value}, tok.begin);
      case TokenKind::StrLit: ++pos_; return make(StrLit{tok.text}, tok.begin);
      case TokenKind::Ident: {
        ++pos_;
        if (!check(TokenKind::LParen)) return make(VarRef{tok.text}, tok.begin);
        ++pos_;
        enter();
        std::vector<ExprPtr> args;
        if (!check(TokenKind::RParen)) {
          args.push_back(parse_or());
          while (check(TokenKind::Comma)) {
            ++pos_;
            args.push_back(parse_or());
          }
        }
        if (!check(TokenKind::RParen)) fail("unterminated argument list", {",", ")"});
        ++pos_;
        --depth_;
        return make(FuncCall{tok.text, std::move(args)}, tok.begin);
      }
      case TokenKind::LParen: {
        ++pos_;
        enter();
        ExprPtr inner = parse_or();
        if (!check(TokenKind::RParen)) fail("missing ')'", {"&&", "||", ")"});
        ++pos_;
        --depth_;
        return inner;
      }
      default:
        fail("unexpected " + std::string(to_string(tok.kind)), kOperandStart);
    }
  }

  std::vector<Token> tokens_;
  std::size_t source_size_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

struct Formatter {
  std::string operator()(const BoolLit& n) const { return n.value ? "true" : "false"; }
  std::string operator()(const IntLit& n) const { return std::to_string(n.value); }
  std::string operator()(const StrLit& n) const { return quote(n.value); }
  std::string operator()(const VarRef& n) const { return n.name; }
  std::string operator()(const EventIs& n) const { return "(event == " + n.name + ")"; }
  std::string operator()(const FuncCall& n) const {
    std::string out = n.name + "(";
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) out += ", ";
      out += format(*n.args[i]);
    }
    return out + ")";
  }
  std::string operator()(const Not& n) const { return "(!" + format(*n.operand) + ")"; }
  std::string operator()(const And& n) const {
    return "(" + format(*n.lhs) + " && " + format(*n.rhs) + ")";
  }
  std::string operator()(const Or& n) const {
    return "(" + format(*n.lhs) + " || " + format(*n.rhs) + ")";
  }
  std::string operator()(const Cmp& n) const {
    return "(" + format(*n.lhs) + " " + std::string(to_string(n.op)) + " " + format(*n.rhs) + ")";
  }
};

}  // namespace

ExprPtr parse(std::string_view source) {
  auto tokens = tokenize(source);
  return Parser(std::move(tokens), source.size()).parse_all();
}

std::string format(const Expr& expr) { return std::visit(Formatter{}, expr.node); }

}  // namespace etadm::dsl
