#include "etadm/replay.hpp"

#include <cstdio>

#include <json.hpp>

namespace etadm {

ReplayReport replay_corpus(std::span<const AnnotatedDialogue> corpus, std::shared_ptr<const Rulebook> rulebook,
                           std::shared_ptr<const DomainDb> db, std::shared_ptr<const ModelParams> model,
                           Policy policy, std::shared_ptr<const ContextEncoder> encoder) {
  ReplayReport rep;
  for (const auto& d : corpus) {
    DialogueSession session(rulebook, db, model, encoder, d.id);
    ++rep.dialogues;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const auto& turn = d.turns[t];
      const TurnResult r = session.run_turn(turn_event(t, turn.frame), turn.frame, turn.user_utterance, policy);
      std::vector<std::string> actual;
      for (int a : r.winner_sequence) actual.push_back(rulebook->action(a).name);
      ++rep.turns;
      if (r.truncated) ++rep.truncated_turns;
      if (actual == turn.action_labels) {
        ++rep.matching_turns;
      } else {
        rep.mismatches.push_back({d.id, t, turn.action_labels, std::move(actual)});
      }
    }
  }
  return rep;
}

std::string replay_to_json(const ReplayReport& r) {
  nlohmann::json mismatches = nlohmann::json::array();
  for (const auto& m : r.mismatches) {
    mismatches.push_back({{"dialogue_id", m.dialogue_id}, {"turn", m.turn}, {"expected", m.expected}, {"actual", m.actual}});
  }
  return nlohmann::json{{"dialogues", r.dialogues},
                        {"turns", r.turns},
                        {"matching_turns", r.matching_turns},
                        {"turn_agreement", r.turn_agreement()},
                        {"truncated_turns", r.truncated_turns},
                        {"mismatches", mismatches}}
      .dump(2);
}

std::string replay_to_text(const ReplayReport& r) {
  char head[160];
  std::snprintf(head, sizeof head, "dialogues %zu  turns %zu  matching %zu  agreement %.4f  truncated %zu\n",
                r.dialogues, r.turns, r.matching_turns, r.turn_agreement(), r.truncated_turns);
  std::string out = head;
  auto names = [](const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s + "]";
  };
  for (const auto& m : r.mismatches) {
    out += m.dialogue_id + " turn " + std::to_string(m.turn) + ": expected " + names(m.expected) + " got " +
           names(m.actual) + "\n";
  }
  return out;
}

}  // namespace etadm
