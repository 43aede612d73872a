#pragma once

// Dialogue state, events, semantic frames, executable actions and the
// restaurant database they query.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace etadm {

inline constexpr std::string_view kStopAction = "STOP";

// Restaurant-domain slot inventory.
inline constexpr std::string_view kInformableSlots[] = {"food", "area", "pricerange"};
inline constexpr std::string_view kRequestableSlots[] = {"name", "address", "phone", "postcode"};

bool is_informable_slot(std::string_view slot);
bool is_requestable_slot(std::string_view slot);

// Names of the state variables that back the slot inventory.
std::string filled_flag(std::string_view informable_slot);     // "<slot>_filled"
std::string requested_flag(std::string_view requestable_slot);  // "req_<slot>"

bool is_valid_identifier(std::string_view name);  // [a-z][a-z0-9_]*

enum class VarKind { Flag, Counter, Text, Enum };

std::string_view to_string(VarKind kind);
std::optional<VarKind> parse_var_kind(std::string_view text);

// Flag -> bool, Counter -> int64 (nonnegative), Text/Enum -> string.
using Value = std::variant<bool, std::int64_t, std::string>;

inline constexpr std::string_view kEnumUnset = "unset";

/// Declaration of a state variable as it appears in a rulebook.
struct VariableDecl {
  std::string name;
  VarKind kind = VarKind::Flag;
  std::vector<std::string> members;  // enum only
  Value initial = false;
  // Position among the auxiliary state-feature bits, flags only.
  std::optional<int> aux_bit;

  bool operator==(const VariableDecl&) const = default;
};

/// Variables every rulebook gets for free: slot values, slot-filled flags,
/// requested flags and the offered venue's requestable fields.
std::vector<VariableDecl> domain_variables();

/// Checks that a value has the representation its kind requires.
bool value_fits(const VariableDecl& decl, const Value& value);

std::string render_value(const Value& value);

struct StateVariable {
  std::string name;
  VarKind kind = VarKind::Flag;
  Value value = false;
  std::optional<int> aux_bit;

  bool operator==(const StateVariable&) const = default;
};

enum class EventOrigin { External, Internal };

struct Event {
  std::string name;
  EventOrigin origin = EventOrigin::Internal;
  std::map<std::string, std::string> payload;

  static Event external(std::string name) { return {std::move(name), EventOrigin::External, {}}; }
  static Event internal(std::string name) { return {std::move(name), EventOrigin::Internal, {}}; }

  bool operator==(const Event&) const = default;
};

inline constexpr std::string_view kExternalEvents[] = {"Start", "Query", "End"};
bool is_external_event_name(std::string_view name);

using SlotMap = std::map<std::string, std::string>;

struct SemanticFrame {
  std::string intent;
  SlotMap informed;
  std::set<std::string> requested;

  bool operator==(const SemanticFrame&) const = default;
};

struct Mutation {
  std::string variable;
  Value value;

  bool operator==(const Mutation&) const = default;
};

struct ActionDef {
  int id = 0;
  std::string name;
  std::vector<Mutation> mutations;
  std::vector<std::string> emits;
  std::string response_template;
  bool db_query = false;

  bool is_stop() const { return name == kStopAction; }

  bool operator==(const ActionDef&) const = default;
};

struct Restaurant {
  std::string name;
  std::string food;
  std::string area;
  std::string pricerange;
  std::string address;
  std::string phone;
  std::string postcode;

  // Field by column name; nullptr for an unknown column.
  const std::string* field(std::string_view column) const;
  std::string* field(std::string_view column);

  bool operator==(const Restaurant&) const = default;
};

class DomainDb {
 public:
  DomainDb() = default;
  // Validates that every field is nonempty and names are unique.
  explicit DomainDb(std::vector<Restaurant> rows);

  static DomainDb parse(std::string_view json_text);
  static DomainDb load(const std::filesystem::path& path);

  const std::vector<Restaurant>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  // Distinct values of an informable column, sorted.
  std::vector<std::string> values_of(std::string_view column) const;

 private:
  std::vector<Restaurant> rows_;
};

/// Rows matching every informed slot by case-insensitive equality. An empty
/// map matches every row.
std::vector<Restaurant> db_lookup(const DomainDb& db, const SlotMap& informed);

struct DialogueState {
  std::vector<StateVariable> variables;
  std::int64_t turn_index = 0;
  std::int64_t mini_turn_index = 0;
  std::deque<Event> event_queue;
  std::optional<int> last_action;
  std::int64_t db_result_count = 0;
  bool db_queried = false;  // a lookup has run at least once
  SemanticFrame frame;

  static DialogueState initial(std::span<const VariableDecl> decls);

  const StateVariable* find(std::string_view name) const;
  StateVariable* find(std::string_view name);

  // Shorthands for the slot flags; false when the variable is absent.
  bool flag(std::string_view name) const;
  bool filled(std::string_view informable_slot) const;
  bool requested(std::string_view requestable_slot) const;

  // Informable slots currently holding a value.
  SlotMap informed_slots() const;

  bool operator==(const DialogueState&) const = default;
};

struct ActionOutcome {
  DialogueState state;
  std::vector<Event> emitted;
  std::string response;
};

/// Executes one action: mutations in declaration order, the optional
/// database lookup, event emission, then template rendering. STOP is the
/// identity. Non-STOP actions advance mini_turn_index and set last_action.
ActionOutcome apply_action(const DialogueState& state, const ActionDef& action, const DomainDb& db);

/// Starts a turn: bumps turn_index, zeroes mini_turn_index, merges the frame
/// into the slot variables and enqueues the external event.
DialogueState reset_for_turn(DialogueState state, const Event& external, const SemanticFrame& frame);

/// Substitutes `{variable}` placeholders with state values.
std::string render_template(std::string_view tmpl, const DialogueState& state);

}  // namespace etadm
