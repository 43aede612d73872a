#include "etadm/dsl/checker.hpp"

#include <algorithm>

namespace etadm::dsl {

std::string_view to_string(Type type) {
  switch (type) {
    case Type::Bool: return "bool";
    case Type::Int: return "int";
    case Type::Str: return "string";
  }
  return "?";
}

const VariableDecl* Schema::find_variable(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

namespace {

Type kind_type(VarKind kind) {
  switch (kind) {
    case VarKind::Flag: return Type::Bool;
    case VarKind::Counter: return Type::Int;
    case VarKind::Text:
    case VarKind::Enum: return Type::Str;
  }
  return Type::Bool;
}

class Checker {
 public:
  explicit Checker(const Schema& schema) : schema_(schema) {}

  Type check(const Expr& e) const {
    return std::visit([&](const auto& n) { return visit(n, e.position); }, e.node);
  }

 private:
  Type visit(const BoolLit&, std::size_t) const { return Type::Bool; }
  Type visit(const IntLit&, std::size_t) const { return Type::Int; }
  Type visit(const StrLit&, std::size_t) const { return Type::Str; }

  Type visit(const VarRef& n, std::size_t pos) const {
    if (n.name == "event") {
      throw TypeError(pos, "`event` can only be compared to an event name with == or !=");
    }
    const auto* decl = schema_.find_variable(n.name);
    if (!decl) throw TypeError(pos, "unknown variable '" + n.name + "'");
    return kind_type(decl->kind);
  }

  Type visit(const EventIs& n, std::size_t pos) const {
    if (!schema_.events.contains(n.name)) throw TypeError(pos, "unknown event '" + n.name + "'");
    return Type::Bool;
  }

  static const std::string& ident_arg(const FuncCall& n, std::size_t pos) {
    if (n.args.size() != 1) {
      throw TypeError(pos, n.name + "() takes exactly one argument");
    }
    const auto* ref = std::get_if<VarRef>(&n.args[0]->node);
    if (!ref) throw TypeError(n.args[0]->position, n.name + "() expects a bare name");
    return ref->name;
  }

  Type visit(const FuncCall& n, std::size_t pos) const {
    if (n.name == "filled") {
      const auto& slot = ident_arg(n, pos);
      if (!is_informable_slot(slot)) throw TypeError(pos, "unknown informable slot '" + slot + "'");
      return Type::Bool;
    }
    if (n.name == "requested") {
      const auto& slot = ident_arg(n, pos);
      if (!is_requestable_slot(slot)) {
        throw TypeError(pos, "unknown requestable slot '" + slot + "'");
      }
      return Type::Bool;
    }
    if (n.name == "last_action") {
      const auto& action = ident_arg(n, pos);
      if (std::find(schema_.actions.begin(), schema_.actions.end(), action) == schema_.actions.end()) {
        throw TypeError(pos, "unknown action '" + action + "'");
      }
      return Type::Bool;
    }
    if (n.name == "turns" || n.name == "db_count") {
      if (!n.args.empty()) throw TypeError(pos, n.name + "() takes no arguments");
      return Type::Int;
    }
    throw TypeError(pos, "unknown function '" + n.name + "'");
  }

  void expect_bool(const Expr& e, std::string_view what) const {
    if (check(e) != Type::Bool) {
      throw TypeError(e.position, std::string(what) + " needs a boolean operand");
    }
  }

  Type visit(const Not& n, std::size_t) const {
    expect_bool(*n.operand, "!");
    return Type::Bool;
  }
  Type visit(const And& n, std::size_t) const {
    expect_bool(*n.lhs, "&&");
    expect_bool(*n.rhs, "&&");
    return Type::Bool;
  }
  Type visit(const Or& n, std::size_t) const {
    expect_bool(*n.lhs, "||");
    expect_bool(*n.rhs, "||");
    return Type::Bool;
  }

  // An enum variable compared with a string literal must name a member.
  void check_enum_literal(const Expr& maybe_var, const Expr& maybe_lit) const {
    const auto* ref = std::get_if<VarRef>(&maybe_var.node);
    const auto* lit = std::get_if<StrLit>(&maybe_lit.node);
    if (!ref || !lit) return;
    const auto* decl = schema_.find_variable(ref->name);
    if (!decl || decl->kind != VarKind::Enum) return;
    if (lit->value != kEnumUnset &&
        std::find(decl->members.begin(), decl->members.end(), lit->value) == decl->members.end()) {
      throw TypeError(maybe_lit.position,
                      "\"" + lit->value + "\" is not a member of enum '" + ref->name + "'");
    }
  }

  Type visit(const Cmp& n, std::size_t pos) const {
    const Type lt = check(*n.lhs);
    const Type rt = check(*n.rhs);
    if (lt != rt) {
      throw TypeError(pos, "cannot compare " + std::string(to_string(lt)) + " with " +
                               std::string(to_string(rt)));
    }
    if (lt != Type::Int && n.op != CmpOp::Eq && n.op != CmpOp::Ne) {
      throw TypeError(pos, "ordering comparison on " + std::string(to_string(lt)));
    }
    check_enum_literal(*n.lhs, *n.rhs);
    check_enum_literal(*n.rhs, *n.lhs);
    return Type::Bool;
  }

  const Schema& schema_;
};

}  // namespace

Type type_of(const Expr& expr, const Schema& schema) { return Checker(schema).check(expr); }

void typecheck(const Expr& expr, const Schema& schema) {
  if (type_of(expr, schema) != Type::Bool) {
    throw TypeError(expr.position, "condition must be boolean");
  }
}

}  // namespace etadm::dsl
