#include "etadm/rulebook.hpp"

#include <algorithm>
#include <set>

#include "etadm/dsl/lexer.hpp"
#include "etadm/dsl/parser.hpp"
#include "etadm/error.hpp"
#include "etadm/text.hpp"
#include "json.hpp"

namespace etadm {

using nlohmann::json;

bool TriggerRule::listens_to(std::string_view event) const {
  return std::find(listens.begin(), listens.end(), event) != listens.end();
}

namespace {

[[noreturn]] void schema_error(const std::string& msg) { throw Error(ErrorCode::SchemaError, msg); }

std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while ((i = tmpl.find('{', i)) != std::string_view::npos) {
    const auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) schema_error("unterminated placeholder in template");
    out.emplace_back(tmpl.substr(i + 1, close - i - 1));
    i = close + 1;
  }
  return out;
}

}  // namespace

Rulebook::Rulebook(std::vector<VariableDecl> declared_variables,
                   std::vector<std::string> internal_events, std::vector<ActionDef> actions,
                   std::vector<TriggerRule> triggers)
    : internal_events_(std::move(internal_events)),
      actions_(std::move(actions)),
      triggers_(std::move(triggers)) {
  variables_ = domain_variables();
  std::set<std::string> names;
  for (const auto& v : variables_) names.insert(v.name);
  std::set<int> aux_bits;
  for (auto& v : declared_variables) {
    if (!is_valid_identifier(v.name)) schema_error("invalid variable name '" + v.name + "'");
    if (!names.insert(v.name).second) schema_error("duplicate variable '" + v.name + "'");
    if (!value_fits(v, v.initial)) schema_error("initial value of '" + v.name + "' does not fit its kind");
    if (v.aux_bit) {
      if (v.kind != VarKind::Flag) schema_error("aux_bit on non-flag variable '" + v.name + "'");
      if (*v.aux_bit < 0 || *v.aux_bit > 7) schema_error("aux_bit of '" + v.name + "' not in 0..7");
      if (!aux_bits.insert(*v.aux_bit).second) schema_error("aux_bit reused by '" + v.name + "'");
    }
    variables_.push_back(std::move(v));
  }

  std::set<std::string> events(std::begin(kExternalEvents), std::end(kExternalEvents));
  for (const auto& e : internal_events_) {
    if (e.empty() || is_external_event_name(e) || !events.insert(e).second) {
      schema_error("invalid or duplicate internal event '" + e + "'");
    }
  }

  if (actions_.empty()) schema_error("rulebook has no actions");
  int stops = 0;
  std::set<std::string> action_set;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto& a = actions_[i];
    if (a.id != static_cast<int>(i)) schema_error("action ids must be 0..A-1 in order");
    if (!action_set.insert(a.name).second) schema_error("duplicate action '" + a.name + "'");
    if (a.is_stop()) {
      ++stops;
      if (!a.mutations.empty() || !a.emits.empty() || !a.response_template.empty() || a.db_query) {
        schema_error("STOP must not mutate, emit, respond or query");
      }
    }
    for (const auto& m : a.mutations) {
      const auto it = std::find_if(variables_.begin(), variables_.end(),
                                   [&](const VariableDecl& d) { return d.name == m.variable; });
      if (it == variables_.end()) {
        throw Error(ErrorCode::UnknownVariable,
                    "action " + a.name + " mutates undeclared variable '" + m.variable + "'");
      }
      if (!value_fits(*it, m.value)) {
        schema_error("action " + a.name + " assigns a mistyped value to '" + m.variable + "'");
      }
    }
    for (const auto& e : a.emits) {
      if (!std::count(internal_events_.begin(), internal_events_.end(), e)) {
        schema_error("action " + a.name + " emits undeclared event '" + e + "'");
      }
    }
    for (const auto& p : placeholders(a.response_template)) {
      if (!names.contains(p)) schema_error("template of " + a.name + " references unknown '" + p + "'");
    }
    action_names_.push_back(a.name);
  }
  if (stops != 1) schema_error("exactly one STOP action is required");
  if (!actions_.back().is_stop()) schema_error("STOP must carry the highest action id");
  if (actions_.size() - 1 > kMaxDialogueActions) {
    schema_error("at most " + std::to_string(kMaxDialogueActions) + " non-STOP actions are supported");
  }

  schema_ = dsl::Schema{variables_, events, action_names_};

  std::set<std::string> trigger_ids;
  for (auto& t : triggers_) {
    if (!trigger_ids.insert(t.id).second) schema_error("duplicate trigger id '" + t.id + "'");
    if (t.listens.empty()) schema_error("trigger " + t.id + " listens to nothing");
    for (const auto& e : t.listens) {
      if (!events.contains(e)) schema_error("trigger " + t.id + " listens to unknown event '" + e + "'");
    }
    const auto id = find_action(t.action);
    if (!id) throw Error(ErrorCode::UnknownActionLabel, "trigger " + t.id + " names unknown action '" + t.action + "'");
    t.action_id = *id;
    if (t.condition_source == kModelCondition) {
      t.condition = nullptr;
      continue;
    }
    try {
      t.condition = dsl::parse(t.condition_source);
      dsl::typecheck(*t.condition, schema_);
    } catch (const Error& e) {
      throw Error(e.code(), "trigger " + t.id + ": " + e.what());
    }
  }
}

const ActionDef& Rulebook::action(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= actions_.size()) {
    throw Error(ErrorCode::InvalidArgument, "action id " + std::to_string(id) + " out of range");
  }
  return actions_[static_cast<std::size_t>(id)];
}

std::optional<int> Rulebook::find_action(std::string_view name) const {
  for (const auto& a : actions_) {
    if (a.name == name) return a.id;
  }
  return std::nullopt;
}

namespace {

Value value_from_json(const json& j, const std::string& where) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  schema_error(where + ": value must be a boolean, integer or string");
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    schema_error(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Rulebook Rulebook::parse(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("rulebook: ") + e.what());
  }
  if (!doc.is_object()) schema_error("rulebook: expected an object");

  std::vector<VariableDecl> vars;
  for (const auto& v : doc.value("variables", json::array())) {
    const std::string where = "variable " + v.value("name", std::string("?"));
    VariableDecl d;
    d.name = field<std::string>(v, "name", where);
    const auto kind = parse_var_kind(field<std::string>(v, "kind", where));
    if (!kind) schema_error(where + ": unknown kind");
    d.kind = *kind;
    d.members = v.value("members", std::vector<std::string>{});
    switch (d.kind) {
      case VarKind::Flag: d.initial = false; break;
      case VarKind::Counter: d.initial = std::int64_t{0}; break;
      case VarKind::Text: d.initial = std::string(); break;
      case VarKind::Enum: d.initial = std::string(kEnumUnset); break;
    }
    if (v.contains("initial")) d.initial = value_from_json(v["initial"], where);
    if (v.contains("aux_bit")) d.aux_bit = field<int>(v, "aux_bit", where);
    vars.push_back(std::move(d));
  }

  auto events = doc.value("events", std::vector<std::string>{});

  std::vector<ActionDef> actions;
  for (const auto& a : doc.value("actions", json::array())) {
    const std::string where = "action " + a.value("name", std::string("?"));
    ActionDef def;
    def.id = field<int>(a, "id", where);
    def.name = field<std::string>(a, "name", where);
    for (const auto& m : a.value("mutations", json::array())) {
      def.mutations.push_back({field<std::string>(m, "variable", where),
                               value_from_json(m.value("value", json()), where)});
    }
    def.emits = a.value("emits", std::vector<std::string>{});
    def.response_template = a.value("response_template", std::string());
    def.db_query = a.value("db_query", false);
    actions.push_back(std::move(def));
  }

  std::vector<TriggerRule> triggers;
  for (const auto& t : doc.value("triggers", json::array())) {
    const std::string where = "trigger " + t.value("id", std::string("?"));
    TriggerRule rule;
    rule.id = field<std::string>(t, "id", where);
    rule.listens = field<std::vector<std::string>>(t, "listens", where);
    rule.condition_source = field<std::string>(t, "condition", where);
    rule.action = field<std::string>(t, "action", where);
    rule.priority = field<int>(t, "priority", where);
    triggers.push_back(std::move(rule));
  }

  return Rulebook(std::move(vars), std::move(events), std::move(actions), std::move(triggers));
}

Rulebook Rulebook::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace etadm
