#include "etadm/state.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <utility>

#include "etadm/error.hpp"
#include "etadm/text.hpp"
#include "json.hpp"

namespace etadm {

namespace {

template <std::size_t N>
bool contains(const std::string_view (&names)[N], std::string_view needle) {
  return std::find(std::begin(names), std::end(names), needle) != std::end(names);
}

}  // namespace

bool is_informable_slot(std::string_view slot) { return contains(kInformableSlots, slot); }
bool is_requestable_slot(std::string_view slot) { return contains(kRequestableSlots, slot); }
bool is_external_event_name(std::string_view name) { return contains(kExternalEvents, name); }

std::string filled_flag(std::string_view informable_slot) {
  return std::string(informable_slot) + "_filled";
}

std::string requested_flag(std::string_view requestable_slot) {
  return "req_" + std::string(requestable_slot);
}

bool is_valid_identifier(std::string_view name) {
  if (name.empty() || name[0] < 'a' || name[0] > 'z') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Flag: return "flag";
    case VarKind::Counter: return "counter";
    case VarKind::Text: return "text";
    case VarKind::Enum: return "enum";
  }
  return "?";
}

std::optional<VarKind> parse_var_kind(std::string_view text) {
  if (text == "flag") return VarKind::Flag;
  if (text == "counter") return VarKind::Counter;
  if (text == "text") return VarKind::Text;
  if (text == "enum") return VarKind::Enum;
  return std::nullopt;
}

std::vector<VariableDecl> domain_variables() {
  std::vector<VariableDecl> out;
  for (auto slot : kInformableSlots) {
    out.push_back({std::string(slot), VarKind::Text, {}, std::string(), std::nullopt});
  }
  for (auto slot : kInformableSlots) {
    out.push_back({filled_flag(slot), VarKind::Flag, {}, false, std::nullopt});
  }
  for (auto slot : kRequestableSlots) {
    out.push_back({requested_flag(slot), VarKind::Flag, {}, false, std::nullopt});
  }
  for (auto slot : kRequestableSlots) {
    out.push_back({std::string(slot), VarKind::Text, {}, std::string(), std::nullopt});
  }
  return out;
}

bool value_fits(const VariableDecl& decl, const Value& value) {
  switch (decl.kind) {
    case VarKind::Flag: return std::holds_alternative<bool>(value);
    case VarKind::Counter:
      return std::holds_alternative<std::int64_t>(value) && std::get<std::int64_t>(value) >= 0;
    case VarKind::Text: return std::holds_alternative<std::string>(value);
    case VarKind::Enum: {
      if (!std::holds_alternative<std::string>(value)) return false;
      const auto& s = std::get<std::string>(value);
      return s == kEnumUnset ||
             std::find(decl.members.begin(), decl.members.end(), s) != decl.members.end();
    }
  }
  return false;
}

std::string render_value(const Value& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

// ---------------------------------------------------------------------------
// Database

const std::string* Restaurant::field(std::string_view column) const {
  if (column == "name") return &name;
  if (column == "food") return &food;
  if (column == "area") return &area;
  if (column == "pricerange") return &pricerange;
  if (column == "address") return &address;
  if (column == "phone") return &phone;
  if (column == "postcode") return &postcode;
  return nullptr;
}

std::string* Restaurant::field(std::string_view column) {
  return const_cast<std::string*>(std::as_const(*this).field(column));
}

DomainDb::DomainDb(std::vector<Restaurant> rows) : rows_(std::move(rows)) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Restaurant& r = rows_[i];
    for (const std::string* f : {&r.name, &r.food, &r.area, &r.pricerange, &r.address, &r.phone,
                                 &r.postcode}) {
      if (f->empty()) {
        throw Error(ErrorCode::SchemaError, "db row " + std::to_string(i) + " has an empty field");
      }
    }
    if (!names.insert(r.name).second) {
      throw Error(ErrorCode::SchemaError, "duplicate restaurant name '" + r.name + "'");
    }
  }
}

DomainDb DomainDb::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("db: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::SchemaError, "db: expected a JSON array of rows");
  std::vector<Restaurant> rows;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    if (!obj.is_object()) {
      throw Error(ErrorCode::SchemaError, "db row " + std::to_string(i) + " is not an object");
    }
    Restaurant r;
    for (auto column : {"name", "food", "area", "pricerange", "address", "phone", "postcode"}) {
      auto it = obj.find(column);
      if (it == obj.end() || !it->is_string()) {
        throw Error(ErrorCode::SchemaError,
                    "db row " + std::to_string(i) + " missing string field '" + column + "'");
      }
      *r.field(column) = it->get<std::string>();
    }
    rows.push_back(std::move(r));
  }
  return DomainDb(std::move(rows));
}

DomainDb DomainDb::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::vector<std::string> DomainDb::values_of(std::string_view column) const {
  std::set<std::string> values;
  for (const auto& row : rows_) {
    if (const auto* f = row.field(column)) values.insert(ascii_lower(*f));
  }
  return {values.begin(), values.end()};
}

std::vector<Restaurant> db_lookup(const DomainDb& db, const SlotMap& informed) {
  for (const auto& [slot, value] : informed) {
    if (!is_informable_slot(slot)) {
      throw Error(ErrorCode::InvalidArgument, "db_lookup on non-informable slot '" + slot + "'");
    }
  }
  std::vector<Restaurant> out;
  for (const auto& row : db.rows()) {
    bool match = std::all_of(informed.begin(), informed.end(), [&](const auto& kv) {
      return iequals(*row.field(kv.first), kv.second);
    });
    if (match) out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// State

DialogueState DialogueState::initial(std::span<const VariableDecl> decls) {
  DialogueState s;
  for (const auto& d : decls) s.variables.push_back({d.name, d.kind, d.initial, d.aux_bit});
  return s;
}

const StateVariable* DialogueState::find(std::string_view name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

StateVariable* DialogueState::find(std::string_view name) {
  return const_cast<StateVariable*>(std::as_const(*this).find(name));
}

bool DialogueState::flag(std::string_view name) const {
  const auto* v = find(name);
  return v && v->kind == VarKind::Flag && std::get<bool>(v->value);
}

bool DialogueState::filled(std::string_view informable_slot) const {
  return flag(filled_flag(informable_slot));
}

bool DialogueState::requested(std::string_view requestable_slot) const {
  return flag(requested_flag(requestable_slot));
}

SlotMap DialogueState::informed_slots() const {
  SlotMap out;
  for (auto slot : kInformableSlots) {
    if (!filled(slot)) continue;
    const auto* v = find(slot);
    if (v && v->kind == VarKind::Text) out.emplace(slot, std::get<std::string>(v->value));
  }
  return out;
}

std::string render_template(std::string_view tmpl, const DialogueState& state) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i++]);
      continue;
    }
    const auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) {
      throw Error(ErrorCode::TemplateSlotMissing, "unterminated placeholder in template");
    }
    const auto name = tmpl.substr(i + 1, close - i - 1);
    const auto* var = state.find(name);
    if (!var) {
      throw Error(ErrorCode::TemplateSlotMissing, "no variable '" + std::string(name) + "'");
    }
    std::string text = render_value(var->value);
    if ((var->kind == VarKind::Text && text.empty()) ||
        (var->kind == VarKind::Enum && text == kEnumUnset)) {
      throw Error(ErrorCode::TemplateSlotMissing, "variable '" + std::string(name) + "' has no value");
    }
    out += text;
    i = close + 1;
  }
  return out;
}

ActionOutcome apply_action(const DialogueState& state, const ActionDef& action, const DomainDb& db) {
  if (action.is_stop()) return {state, {}, {}};

  DialogueState next = state;
  for (const auto& m : action.mutations) {
    auto* var = next.find(m.variable);
    if (!var) {
      throw Error(ErrorCode::UnknownVariable,
                  "action " + action.name + " mutates undeclared variable '" + m.variable + "'");
    }
    if (var->value.index() != m.value.index()) {
      throw Error(ErrorCode::InvalidArgument,
                  "action " + action.name + " assigns a mistyped value to '" + m.variable + "'");
    }
    var->value = m.value;
  }

  if (action.db_query) {
    const auto rows = db_lookup(db, next.informed_slots());
    next.db_result_count = static_cast<std::int64_t>(rows.size());
    next.db_queried = true;
    for (auto column : kRequestableSlots) {
      auto* var = next.find(column);
      if (var && var->kind == VarKind::Text) {
        var->value = rows.empty() ? std::string() : *rows.front().field(column);
      }
    }
  }

  std::vector<Event> emitted;
  for (const auto& name : action.emits) {
    emitted.push_back(Event::internal(name));
    next.event_queue.push_back(emitted.back());
  }
  next.last_action = action.id;
  ++next.mini_turn_index;

  std::string response = render_template(action.response_template, next);
  return {std::move(next), std::move(emitted), std::move(response)};
}

DialogueState reset_for_turn(DialogueState state, const Event& external, const SemanticFrame& frame) {
  if (!state.event_queue.empty()) {
    throw Error(ErrorCode::QueueNotEmpty,
                std::to_string(state.event_queue.size()) + " event(s) still queued at turn start");
  }
  if (external.origin != EventOrigin::External || !is_external_event_name(external.name)) {
    throw Error(ErrorCode::InvalidArgument, "'" + external.name + "' is not an external event");
  }
  for (const auto& [slot, value] : frame.informed) {
    if (!is_informable_slot(slot)) {
      throw Error(ErrorCode::InvalidFrame, "'" + slot + "' is not an informable slot");
    }
    if (value.empty()) throw Error(ErrorCode::InvalidFrame, "empty value for slot '" + slot + "'");
  }
  for (const auto& slot : frame.requested) {
    if (!is_requestable_slot(slot)) {
      throw Error(ErrorCode::InvalidFrame, "'" + slot + "' is not a requestable slot");
    }
  }

  ++state.turn_index;
  state.mini_turn_index = 0;
  for (const auto& [slot, value] : frame.informed) {
    if (auto* v = state.find(slot)) v->value = value;
    if (auto* f = state.find(filled_flag(slot))) f->value = true;
  }
  for (const auto& slot : frame.requested) {
    if (auto* f = state.find(requested_flag(slot))) f->value = true;
  }
  state.frame = frame;
  state.event_queue.push_back(external);
  return state;
}

}  // namespace etadm
