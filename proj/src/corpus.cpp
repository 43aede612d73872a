#include "etadm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "etadm/error.hpp"
#include "etadm/serialization.hpp"
#include "etadm/rng.hpp"
#include "etadm/runtime.hpp"
#include "etadm/text.hpp"
#include "json.hpp"

namespace etadm {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorCode::SchemaError, where + ": " + msg);
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& member(const json& obj, const char* key, json::value_t type, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing '") + key + "'");
  const bool ok = it->type() == type ||
                  (type == json::value_t::number_integer && it->is_number_unsigned());
  if (!ok) schema_error(where + "/" + key, std::string("has the wrong type (") + it->type_name() + ")");
  return *it;
}

}  // namespace

std::vector<AnnotatedDialogue> parse_corpus(std::string_view json_text, const Rulebook& rulebook) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError,
                "corpus is not valid JSON at " + line_col(json_text, e.byte ? e.byte - 1 : 0));
  }
  const json* dialogues = &doc;
  if (doc.is_object()) {
    const auto& version = member(doc, "version", json::value_t::number_integer, "");
    if (version.get<int>() != kCorpusFormatVersion) schema_error("/version", "unsupported version");
    dialogues = &member(doc, "dialogues", json::value_t::array, "");
  } else if (!doc.is_array()) {
    schema_error("/", "expected an object with 'dialogues'");
  }

  std::vector<AnnotatedDialogue> out;
  std::set<std::string> ids;
  for (std::size_t d = 0; d < dialogues->size(); ++d) {
    const std::string where = "/dialogues/" + std::to_string(d);
    const json& dj = (*dialogues)[d];
    if (!dj.is_object()) schema_error(where, "dialogue must be an object");
    AnnotatedDialogue dialogue;
    dialogue.id = member(dj, "id", json::value_t::string, where).get<std::string>();
    if (dialogue.id.empty() || !ids.insert(dialogue.id).second) {
      schema_error(where + "/id", "dialogue ids must be nonempty and unique");
    }
    const json& turns = member(dj, "turns", json::value_t::array, where);
    for (std::size_t t = 0; t < turns.size(); ++t) {
      const std::string tw = where + "/turns/" + std::to_string(t);
      const json& tj = turns[t];
      if (!tj.is_object()) schema_error(tw, "turn must be an object");
      AnnotatedTurn turn;
      turn.user_utterance = member(tj, "user_utterance", json::value_t::string, tw).get<std::string>();
      turn.frame = frame_from_json(member(tj, "frame", json::value_t::object, tw), tw + "/frame");
      const json& labels = member(tj, "action_labels", json::value_t::array, tw);
      if (labels.empty()) schema_error(tw + "/action_labels", "must not be empty");
      for (std::size_t l = 0; l < labels.size(); ++l) {
        const std::string lw = tw + "/action_labels/" + std::to_string(l);
        if (!labels[l].is_string()) schema_error(lw, "must be a string");
        auto name = labels[l].get<std::string>();
        if (name == kStopAction) schema_error(lw, "STOP is implicit and must not be labeled");
        if (!rulebook.find_action(name)) {
          throw Error(ErrorCode::UnknownActionLabel, lw + ": '" + name + "' is not in the rulebook");
        }
        turn.action_labels.push_back(std::move(name));
      }
      turn.system_response =
          member(tj, "system_response", json::value_t::string, tw).get<std::string>();
      dialogue.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(dialogue));
  }
  return out;
}

std::vector<AnnotatedDialogue> load_corpus(const std::filesystem::path& path, const Rulebook& rulebook) {
  return parse_corpus(read_file(path), rulebook);
}

std::string serialize_corpus(std::span<const AnnotatedDialogue> dialogues,
                             const GeneratorInfo* generator) {
  json doc;
  doc["version"] = kCorpusFormatVersion;
  if (generator) doc["generator"] = {{"seed", generator->seed}, {"count", generator->count}};
  json arr = json::array();
  for (const auto& d : dialogues) {
    json turns = json::array();
    for (const auto& t : d.turns) {
      turns.push_back({{"user_utterance", t.user_utterance},
                       {"frame", frame_to_json(t.frame)},
                       {"action_labels", t.action_labels},
                       {"system_response", t.system_response}});
    }
    arr.push_back({{"id", d.id}, {"turns", std::move(turns)}});
  }
  doc["dialogues"] = std::move(arr);
  return doc.dump(1) + "\n";
}

void save_corpus(std::span<const AnnotatedDialogue> dialogues, const std::filesystem::path& path,
                 const GeneratorInfo* generator) {
  write_file(path, serialize_corpus(dialogues, generator));
}

std::vector<Utterance> context_before(const AnnotatedDialogue& dialogue, std::size_t turn) {
  std::vector<Utterance> ctx;
  for (std::size_t t = 0; t < turn && t < dialogue.turns.size(); ++t) {
    ctx.push_back({"usr", dialogue.turns[t].user_utterance});
    ctx.push_back({"sys", dialogue.turns[t].system_response});
  }
  if (turn < dialogue.turns.size()) ctx.push_back({"usr", dialogue.turns[turn].user_utterance});
  return ctx;
}

std::vector<MiniTurnRecord> collect_records(std::span<const AnnotatedDialogue> corpus,
                                            const Rulebook& rulebook, const DomainDb& db,
                                            const ContextEncoder& encoder) {
  std::vector<MiniTurnRecord> records;
  for (const auto& dialogue : corpus) {
    DialogueState state = rulebook.initial_state();
    for (std::size_t t = 0; t < dialogue.turns.size(); ++t) {
      const AnnotatedTurn& turn = dialogue.turns[t];
      const std::string where = "dialogue " + dialogue.id + " turn " + std::to_string(t);
      const FeatureVector context =
          encoder.encode(context_before(dialogue, t), turn_key(dialogue.id, t));
      try {
        state = reset_for_turn(std::move(state), turn_event(t, turn.frame), turn.frame);
      } catch (const Error& e) {
        throw Error(ErrorCode::ReplayError, where + ": " + e.what());
      }
      auto emit = [&](int action) {
        records.push_back({dialogue.id, static_cast<std::int64_t>(t), state.mini_turn_index, context,
                           encode_state(state), action});
      };
      for (const auto& label : turn.action_labels) {
        const auto id = rulebook.find_action(label);
        if (!id) throw Error(ErrorCode::UnknownActionLabel, where + ": '" + label + "'");
        emit(*id);
        try {
          state = apply_action(state, rulebook.action(*id), db).state;
        } catch (const Error& e) {
          throw Error(ErrorCode::ReplayError, where + " action " + label + ": " + e.what());
        }
      }
      emit(rulebook.stop_id());
      state.event_queue.clear();
    }
  }
  return records;
}

std::vector<std::string> dialogue_ids(std::span<const MiniTurnRecord> records) {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.dialogue_id).second) ids.push_back(r.dialogue_id);
  }
  return ids;
}

std::pair<std::vector<MiniTurnRecord>, std::vector<MiniTurnRecord>> split_records(
    std::span<const MiniTurnRecord> records, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1]");
  }
  auto ids = dialogue_ids(records);
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ids.size()) + 1e-9));
  if (n_train == 0) throw Error(ErrorCode::EmptySplit, "split leaves no training dialogues");
  const std::unordered_set<std::string> train_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));

  std::pair<std::vector<MiniTurnRecord>, std::vector<MiniTurnRecord>> out;
  for (const auto& r : records) {
    (train_ids.contains(r.dialogue_id) ? out.first : out.second).push_back(r);
  }
  return out;
}

std::string serialize_record(const MiniTurnRecord& r) {
  std::vector<int> bits(r.state.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = r.state[i] != 0.0 ? 1 : 0;
  json j = {{"dialogue_id", r.dialogue_id},
            {"turn_index", r.turn_index},
            {"mini_turn_index", r.mini_turn_index},
            {"gold_action", r.gold_action},
            {"state_feature", bits},
            {"context_feature", r.context.values}};
  return j.dump();
}

MiniTurnRecord parse_record(std::string_view line) {
  try {
    const json j = json::parse(line);
    MiniTurnRecord r;
    r.dialogue_id = j.at("dialogue_id").get<std::string>();
    r.turn_index = j.at("turn_index").get<std::int64_t>();
    r.mini_turn_index = j.at("mini_turn_index").get<std::int64_t>();
    r.gold_action = j.at("gold_action").get<int>();
    r.context = {FeatureRole::Context, j.at("context_feature").get<std::vector<double>>()};
    std::vector<double> bits;
    for (const auto& b : j.at("state_feature")) {
      const int v = b.get<int>();
      if (v != 0 && v != 1) throw Error(ErrorCode::SchemaError, "state_feature entries must be 0 or 1");
      bits.push_back(v);
    }
    r.state = {FeatureRole::State, std::move(bits)};
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("record: ") + e.what());
  }
}

void save_records(std::span<const MiniTurnRecord> records, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<MiniTurnRecord> load_records(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<MiniTurnRecord> out;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line(text.data() + start, end - start);
    if (!line.empty()) {
      try {
        out.push_back(parse_record(line));
      } catch (const Error& e) {
        throw Error(e.code(), path.string() + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return out;
}

}  // namespace etadm
