#pragma once

// JSON forms shared by the corpus files, the service and the trace stream.

#include <string>

#include <json.hpp>

#include "etadm/rulebook.hpp"
#include "etadm/runtime.hpp"
#include "etadm/state.hpp"

namespace etadm {

// `where` is the JSON-pointer location used in SchemaError messages.
SemanticFrame frame_from_json(const nlohmann::json& j, const std::string& where = "");
nlohmann::json frame_to_json(const SemanticFrame& frame);

nlohmann::json value_to_json(const Value& value);

// Variables, counters and the 64-bit feature of a state.
nlohmann::json state_to_json(const DialogueState& state, const Rulebook& rulebook);

nlohmann::json mini_turn_to_json(const MiniTurnTrace& trace, const Rulebook& rulebook);
nlohmann::json turn_to_json(const TurnResult& result, const Rulebook& rulebook);

}  // namespace etadm
