#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "etadm/dsl/eval.hpp"
#include "etadm/dsl/lexer.hpp"
#include "etadm/dsl/parser.hpp"

using namespace etadm;
using namespace etadm::dsl;

namespace {

std::vector<TokenKind> kinds(const std::string& src) {
  std::vector<TokenKind> out;
  for (const auto& t : tokenize(src)) out.push_back(t.kind);
  return out;
}

ErrorCode parse_error_code(const std::string& src) {
  try {
    parse(src);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: no error
}

}  // namespace

TEST(Lexer, SingleLiteral) {
  const auto toks = tokenize("true");
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(toks[0].kind, TokenKind::BoolLit);
  EXPECT_TRUE(toks[0].bool_value);
}

TEST(Lexer, ConditionTokens) {
  using K = TokenKind;
  EXPECT_EQ(kinds("!filled(food) && event == Query"),
            (std::vector<K>{K::Not, K::Ident, K::LParen, K::Ident, K::RParen, K::AndAnd, K::Ident, K::EqEq, K::Ident}));
}

TEST(Lexer, BadCharacterOffset) {
  try {
    tokenize("a @ b");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::LexError);
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(Lexer, StringsCommentsAndOverflow) {
  const auto toks = tokenize("\"a\\\"b\" # trailing comment\n 42");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].text, "a\"b");
  EXPECT_EQ(toks[1].int_value, 42);
  EXPECT_THROW(tokenize("99999999999999999999999"), SyntaxError);
  EXPECT_THROW(tokenize("\"open"), SyntaxError);
  EXPECT_THROW(tokenize("a & b"), SyntaxError);
}

TEST(Parser, Precedence) {
  EXPECT_TRUE(same(parse("a || b && c"), either(var("a"), both(var("b"), var("c")))));
  EXPECT_TRUE(same(parse("turns() >= 2 && !filled(area)"),
                   both(compare(CmpOp::Ge, call("turns"), integer(2)), negate(call("filled", {var("area")})))));
  EXPECT_TRUE(same(parse("!a == b"), negate(compare(CmpOp::Eq, var("a"), var("b")))));
}

TEST(Parser, EventComparison) {
  EXPECT_TRUE(same(parse("event == Query"), event_is("Query")));
  EXPECT_TRUE(same(parse("event != End"), negate(event_is("End"))));
}

TEST(Parser, Rejections) {
  EXPECT_EQ(parse_error_code("a == b == c"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("food_filled + 1"), ErrorCode::LexError);
  EXPECT_EQ(parse_error_code("(a"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code(""), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("a b"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code(std::string(5000, '(') + "a" + std::string(5000, ')')), ErrorCode::ParseError);
}

TEST(Parser, ErrorsCarryExpectedSet) {
  try {
    parse("a &&");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 4u);
    EXPECT_FALSE(e.expected().empty());
  }
}

TEST(Format, FullyParenthesized) {
  EXPECT_EQ(format(either(var("a"), both(var("b"), var("c")))), "(a || (b && c))");
  EXPECT_EQ(format(negate(boolean(true))), "(!true)");
}

TEST(Format, RoundTripRandomTrees) {
  const auto rb = fixtures::test_rulebook("typed_rulebook.json");
  Rng rng(101);
  oracle::ExprGen gen(rb->schema(), rng);
  for (int i = 0; i < 1000; ++i) {
    const auto e = gen.boolean(static_cast<int>(rng.below(6)));
    const auto text = format(e);
    ASSERT_TRUE(same(parse(text), e)) << text;
    ASSERT_NO_THROW(typecheck(*e, rb->schema())) << text;
  }
}

TEST(Parser, FuzzOnlySyntaxErrors) {
  Rng rng(7);
  static const std::string alphabet = "abc_()!&|=<>\"\\ 019,#\nturesfl";
  for (int i = 0; i < 5000; ++i) {
    std::string s(rng.below(40), '\0');
    for (auto& c : s) {
      c = rng.chance(0.5) ? alphabet[rng.below(alphabet.size())] : static_cast<char>(rng.below(256));
    }
    try {
      parse(s);
    } catch (const SyntaxError& e) {
      ASSERT_TRUE(e.code() == ErrorCode::LexError || e.code() == ErrorCode::ParseError);
    }
  }
}

TEST(Checker, Examples) {
  const auto& schema = fixtures::rulebook()->schema();
  EXPECT_NO_THROW(typecheck(*parse("food_filled"), schema));
  EXPECT_THROW(typecheck(*parse("filled(nosuchslot)"), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("nosuch"), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("turns()"), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("food < \"x\""), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("food == 1"), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("event == Nope"), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("last_action(Dance)"), schema), TypeError);
  EXPECT_NO_THROW(typecheck(*parse("last_action(QueryDB) && db_count() > 1"), schema));
}

TEST(Checker, EnumMembers) {
  const auto rb = fixtures::test_rulebook("typed_rulebook.json");
  const auto& schema = rb->schema();
  EXPECT_NO_THROW(typecheck(*parse("mood == \"calm\""), schema));
  EXPECT_NO_THROW(typecheck(*parse("\"unset\" != mood"), schema));
  EXPECT_THROW(typecheck(*parse("mood == \"happy\""), schema), TypeError);
  EXPECT_THROW(typecheck(*parse("attempts == true"), schema), TypeError);
}

TEST(Evaluate, Examples) {
  const auto rb = fixtures::rulebook();
  const auto fresh = rb->initial_state();
  EXPECT_TRUE(evaluate(*parse("true"), fresh, Event::external("Start")));
  EXPECT_TRUE(evaluate(*parse("event == Query && !filled(food)"), fresh, Event::external("Query")));
  EXPECT_FALSE(evaluate(*parse("event == Query && !filled(food)"), fresh, Event::external("End")));
}

TEST(Evaluate, AgreesWithOracle) {
  const auto rb = fixtures::test_rulebook("typed_rulebook.json");
  Rng rng(3);
  oracle::ExprGen gen(rb->schema(), rng);
  const std::vector<std::string> events = {"Start", "Query", "End", "Ping", "Pong"};
  for (int i = 0; i < 200; ++i) {
    const auto e = gen.boolean(4);
    for (int k = 0; k < 50; ++k) {
      const auto st = oracle::random_state(*rb, rng);
      const Event ev = Event::internal(events[rng.below(events.size())]);
      ASSERT_EQ(evaluate(*e, st, ev, rb->action_names()), oracle::naive_eval(*e, st, ev, rb->action_names()).b)
          << format(e);
    }
  }
}
