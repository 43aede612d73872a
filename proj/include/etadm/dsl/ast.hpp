#pragma once

// Abstract syntax of trigger condition expressions.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace etadm::dsl {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);

struct BoolLit {
  bool value = false;
};
struct IntLit {
  std::int64_t value = 0;
};
struct StrLit {
  std::string value;
};
struct VarRef {
  std::string name;
};
// `event == Name`; the `event` pseudo-variable compared against an event name.
struct EventIs {
  std::string name;
};
struct FuncCall {
  std::string name;
  std::vector<ExprPtr> args;
};
struct Not {
  ExprPtr operand;
};
struct And {
  ExprPtr lhs, rhs;
};
struct Or {
  ExprPtr lhs, rhs;
};
struct Cmp {
  CmpOp op = CmpOp::Eq;
  ExprPtr lhs, rhs;
};

using Node = std::variant<BoolLit, IntLit, StrLit, VarRef, EventIs, FuncCall, Not, And, Or, Cmp>;

struct Expr {
  Node node;
  // Byte offset of the node's first token; ignored by equality.
  std::size_t position = 0;
};

// Structural equality; source positions do not participate.
bool operator==(const Expr& a, const Expr& b);
bool same(const ExprPtr& a, const ExprPtr& b);

ExprPtr make(Node node, std::size_t position = 0);

inline ExprPtr boolean(bool v) { return make(BoolLit{v}); }
inline ExprPtr integer(std::int64_t v) { return make(IntLit{v}); }
inline ExprPtr string(std::string v) { return make(StrLit{std::move(v)}); }
inline ExprPtr var(std::string name) { return make(VarRef{std::move(name)}); }
inline ExprPtr event_is(std::string name) { return make(EventIs{std::move(name)}); }
inline ExprPtr call(std::string name, std::vector<ExprPtr> args = {}) {
  return make(FuncCall{std::move(name), std::move(args)});
}
inline ExprPtr negate(ExprPtr e) { return make(Not{std::move(e)}); }
inline ExprPtr both(ExprPtr a, ExprPtr b) { return make(And{std::move(a), std::move(b)}); }
inline ExprPtr either(ExprPtr a, ExprPtr b) { return make(Or{std::move(a), std::move(b)}); }
inline ExprPtr compare(CmpOp op, ExprPtr a, ExprPtr b) {
  return make(Cmp{op, std::move(a), std::move(b)});
}

}  // namespace etadm::dsl
