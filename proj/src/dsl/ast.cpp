#include "etadm/dsl/ast.hpp"

namespace etadm::dsl {

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

ExprPtr make(Node node, std::size_t position) {
  return std::make_shared<const Expr>(Expr{std::move(node), position});
}

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  return *a == *b;
}

namespace {

struct NodeEq {
  bool operator()(const BoolLit& a, const BoolLit& b) const { return a.value == b.value; }
  bool operator()(const IntLit& a, const IntLit& b) const { return a.value == b.value; }
  bool operator()(const StrLit& a, const StrLit& b) const { return a.value == b.value; }
  bool operator()(const VarRef& a, const VarRef& b) const { return a.name == b.name; }
  bool operator()(const EventIs& a, const EventIs& b) const { return a.name == b.name; }
  bool operator()(const FuncCall& a, const FuncCall& b) const {
    if (a.name != b.name || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (!same(a.args[i], b.args[i])) return false;
    }
    return true;
  }
  bool operator()(const Not& a, const Not& b) const { return same(a.operand, b.operand); }
  bool operator()(const And& a, const And& b) const {
    return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
  }
  bool operator()(const Or& a, const Or& b) const {
    return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
  }
  bool operator()(const Cmp& a, const Cmp& b) const {
    return a.op == b.op && same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
  }
  template <typename A, typename B>
  bool operator()(const A&, const B&) const {
    return false;
  }
};

}  // namespace

bool operator==(const Expr& a, const Expr& b) { return std::visit(NodeEq{}, a.node, b.node); }

}  // namespace etadm::dsl
