#include <gtest/gtest.h>

#include "../support/fixtures.hpp"
#include "etadm/error.hpp"
#include "etadm/rulebook.hpp"

using namespace etadm;

namespace {

std::string book(const std::string& actions, const std::string& triggers, const std::string& variables = "[]") {
  return R"({"variables": )" + variables + R"(, "events": ["Ping"], "actions": )" + actions +
         R"(, "triggers": )" + triggers + "}";
}

ErrorCode failure(const std::string& text) {
  try {
    Rulebook::parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

const std::string kTwo = R"([{"id": 0, "name": "Say", "response_template": "hi"}, {"id": 1, "name": "STOP"}])";

}  // namespace

TEST(Rulebook, BundledLoads) {
  const auto rb = fixtures::rulebook();
  EXPECT_EQ(rb->action_count(), 13u);
  EXPECT_EQ(rb->action(rb->stop_id()).name, "STOP");
  EXPECT_EQ(rb->triggers().front().id, "greet");
  EXPECT_TRUE(rb->find_action("QueryDB").has_value());
  EXPECT_FALSE(rb->find_action("Dance").has_value());
}

TEST(Rulebook, ModelTriggerHasNoCondition) {
  const auto rb = Rulebook::parse(book(kTwo, R"([{"id": "m", "listens": ["Query"], "condition": "MODEL", "action": "Say", "priority": 1}])"));
  EXPECT_TRUE(rb.triggers()[0].is_model());
}

TEST(Rulebook, Rejections) {
  const std::string ok_trigger = R"([{"id": "t", "listens": ["Query"], "condition": "true", "action": "Say", "priority": 1}])";
  EXPECT_EQ(failure(book(kTwo, ok_trigger)), ErrorCode::Io);
  // STOP missing or not last
  EXPECT_EQ(failure(book(R"([{"id": 0, "name": "Say"}])", "[]")), ErrorCode::SchemaError);
  EXPECT_EQ(failure(book(R"([{"id": 0, "name": "STOP"}, {"id": 1, "name": "Say"}])", "[]")), ErrorCode::SchemaError);
  // condition problems
  EXPECT_EQ(failure(book(kTwo, R"([{"id": "t", "listens": ["Query"], "condition": "a &&", "action": "Say", "priority": 1}])")),
            ErrorCode::ParseError);
  EXPECT_EQ(failure(book(kTwo, R"([{"id": "t", "listens": ["Query"], "condition": "nosuch", "action": "Say", "priority": 1}])")),
            ErrorCode::TypeError);
  // unknown action / event
  EXPECT_EQ(failure(book(kTwo, R"([{"id": "t", "listens": ["Query"], "condition": "true", "action": "Sing", "priority": 1}])")),
            ErrorCode::UnknownActionLabel);
  EXPECT_EQ(failure(book(kTwo, R"([{"id": "t", "listens": ["Nope"], "condition": "true", "action": "Say", "priority": 1}])")),
            ErrorCode::SchemaError);
  // template placeholder
  EXPECT_EQ(failure(book(R"([{"id": 0, "name": "Say", "response_template": "{nosuch}"}, {"id": 1, "name": "STOP"}])", "[]")),
            ErrorCode::SchemaError);
  // aux bits
  EXPECT_EQ(failure(book(kTwo, "[]", R"([{"name": "a", "kind": "flag", "aux_bit": 8}])")), ErrorCode::SchemaError);
  EXPECT_EQ(failure(book(kTwo, "[]", R"([{"name": "a", "kind": "flag", "aux_bit": 1}, {"name": "b", "kind": "flag", "aux_bit": 1}])")),
            ErrorCode::SchemaError);
  EXPECT_EQ(failure("{"), ErrorCode::SchemaError);
}

TEST(Rulebook, TooManyActions) {
  std::string actions = "[";
  for (int i = 0; i < 13; ++i) actions += R"({"id": )" + std::to_string(i) + R"(, "name": "A)" + std::to_string(i) + R"("},)";
  actions += R"({"id": 13, "name": "STOP"}])";
  EXPECT_EQ(failure(book(actions, "[]")), ErrorCode::SchemaError);
}
