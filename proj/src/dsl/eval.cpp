#include "etadm/dsl/eval.hpp"

#include "etadm/error.hpp"

namespace etadm::dsl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Evaluator {
  const DialogueState& state;
  const Event& event;
  std::span<const std::string> action_names;

  Value eval(const Expr& e) const {
    return std::visit(
        overloaded{
            [](const BoolLit& n) -> Value { return n.value; },
            [](const IntLit& n) -> Value { return n.value; },
            [](const StrLit& n) -> Value { return n.value; },
            [&](const VarRef& n) -> Value {
              const auto* v = state.find(n.name);
              if (!v) throw Error(ErrorCode::UnknownVariable, "'" + n.name + "' not in state");
              return v->value;
            },
            [&](const EventIs& n) -> Value { return event.name == n.name; },
            [&](const FuncCall& n) -> Value { return call(n); },
            [&](const Not& n) -> Value { return !truth(*n.operand); },
            [&](const And& n) -> Value { return truth(*n.lhs) && truth(*n.rhs); },
            [&](const Or& n) -> Value { return truth(*n.lhs) || truth(*n.rhs); },
            [&](const Cmp& n) -> Value { return compare(n.op, eval(*n.lhs), eval(*n.rhs)); },
        },
        e.node);
  }

  bool truth(const Expr& e) const { return std::get<bool>(eval(e)); }

  static const std::string& name_arg(const FuncCall& n) {
    return std::get<VarRef>(n.args.at(0)->node).name;
  }

  Value call(const FuncCall& n) const {
    if (n.name == "filled") return state.filled(name_arg(n));
    if (n.name == "requested") return state.requested(name_arg(n));
    if (n.name == "turns") return state.turn_index;
    if (n.name == "db_count") return state.db_result_count;
    if (n.name == "last_action") {
      if (!state.last_action) return false;
      const auto id = static_cast<std::size_t>(*state.last_action);
      return id < action_names.size() && action_names[id] == name_arg(n);
    }
    throw Error(ErrorCode::TypeError, "unknown function '" + n.name + "'");
  }

  static bool compare(CmpOp op, const Value& a, const Value& b) {
    switch (op) {
      case CmpOp::Eq: return a == b;
      case CmpOp::Ne: return a != b;
      case CmpOp::Lt: return a < b;
      case CmpOp::Le: return a <= b;
      case CmpOp::Gt: return a > b;
      case CmpOp::Ge: return a >= b;
    }
    return false;
  }
};

}  // namespace

bool evaluate(const Expr& expr, const DialogueState& state, const Event& event,
              std::span<const std::string> action_names) {
  return std::get<bool>(Evaluator{state, event, action_names}.eval(expr));
}

}  // namespace etadm::dsl
