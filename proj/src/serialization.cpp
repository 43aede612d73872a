#include "etadm/serialization.hpp"

#include "etadm/error.hpp"
#include "etadm/features.hpp"

namespace etadm {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorCode::SchemaError, (where.empty() ? "frame" : where) + ": " + msg);
}

std::vector<int> bits_of(const FeatureVector& v) {
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0.0 ? 1 : 0;
  return out;
}

}  // namespace

SemanticFrame frame_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "frame must be an object");
  SemanticFrame f;
  if (auto it = j.find("intent"); it != j.end()) {
    if (!it->is_string()) schema_error(where + "/intent", "must be a string");
    f.intent = it->get<std::string>();
  }
  if (auto it = j.find("informed"); it != j.end()) {
    if (!it->is_object()) schema_error(where + "/informed", "must be an object");
    for (const auto& [slot, value] : it->items()) {
      if (!is_informable_slot(slot)) schema_error(where + "/informed", "unknown slot '" + slot + "'");
      if (!value.is_string() || value.get<std::string>().empty()) {
        schema_error(where + "/informed/" + slot, "value must be a nonempty string");
      }
      f.informed.emplace(slot, value.get<std::string>());
    }
  }
  if (auto it = j.find("requested"); it != j.end()) {
    if (!it->is_array()) schema_error(where + "/requested", "must be an array");
    for (const auto& slot : *it) {
      if (!slot.is_string() || !is_requestable_slot(slot.get<std::string>())) {
        schema_error(where + "/requested", "unknown slot " + slot.dump());
      }
      f.requested.insert(slot.get<std::string>());
    }
  }
  return f;
}

json frame_to_json(const SemanticFrame& f) {
  return {{"intent", f.intent},
          {"informed", f.informed},
          {"requested", std::vector<std::string>(f.requested.begin(), f.requested.end())}};
}

json value_to_json(const Value& value) {
  return std::visit([](const auto& v) { return json(v); }, value);
}

json state_to_json(const DialogueState& s, const Rulebook& rb) {
  json vars = json::object();
  for (const auto& v : s.variables) vars[v.name] = value_to_json(v.value);
  return {{"turn_index", s.turn_index},
          {"mini_turn_index", s.mini_turn_index},
          {"last_action", s.last_action ? json(rb.action(*s.last_action).name) : json(nullptr)},
          {"db_result_count", s.db_queried ? json(s.db_result_count) : json(nullptr)},
          {"frame", frame_to_json(s.frame)},
          {"variables", vars},
          {"state_feature", bits_of(encode_state(s))}};
}

json mini_turn_to_json(const MiniTurnTrace& t, const Rulebook& rb) {
  return {{"mini_turn_index", t.mini_turn_index},
          {"event", t.event ? json(*t.event) : json(nullptr)},
          {"activated", t.activated ? json(*t.activated) : json(nullptr)},
          {"probabilities", t.probabilities ? json(*t.probabilities) : json(nullptr)},
          {"chosen_action", t.chosen_action},
          {"chosen_action_name", rb.action(t.chosen_action).name},
          {"state_feature", t.state_feature},
          {"response", t.response},
          {"render_failed", t.render_failed}};
}

json turn_to_json(const TurnResult& r, const Rulebook& rb) {
  std::vector<std::string> names;
  for (int a : r.winner_sequence) names.push_back(rb.action(a).name);
  json traces = json::array();
  for (const auto& t : r.traces) traces.push_back(mini_turn_to_json(t, rb));
  return {{"turn_index", r.turn_index},
          {"event", r.event},
          {"winner_sequence", r.winner_sequence},
          {"winner_names", names},
          {"response", r.response},
          {"truncated", r.truncated},
          {"traces", traces}};
}

}  // namespace etadm
