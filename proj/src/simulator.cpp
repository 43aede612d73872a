// Agenda-style user simulator used to synthesize action-annotated dialogues.

#include <algorithm>
#include <cstdio>
#include <set>

#include "etadm/corpus.hpp"
#include "etadm/error.hpp"
#include "etadm/rng.hpp"
#include "etadm/runtime.hpp"

namespace etadm {

namespace {

struct Goal {
  SlotMap constraints;
  std::vector<std::string> requests;
};

const std::vector<std::string> kFoodPhrases = {"i want {} food", "i am looking for {} food",
                                               "{} food please", "how about {} food"};
const std::vector<std::string> kAreaPhrases = {"in the {}", "in the {} part of town",
                                               "somewhere in the {}"};
const std::vector<std::string> kPricePhrases = {"something {}", "in the {} price range",
                                                "a {} place"};
const std::vector<std::string> kAlternativePhrases = {"how about the {}", "try the {} then",
                                                      "what about the {} part of town"};
const std::vector<std::string> kRequestLeads = {"what is the {}", "can i have the {}",
                                                "could you tell me the {}"};
const std::vector<std::string> kOpeners = {"", "", "hello ", "yes "};
const std::vector<std::string> kFarewells = {"thank you goodbye", "thanks bye", "goodbye",
                                             "that is all thank you bye"};

std::string fill(const std::string& pattern, const std::string& value) {
  const auto at = pattern.find("{}");
  return pattern.substr(0, at) + value + pattern.substr(at + 2);
}

std::string request_phrase(const std::string& slot) {
  if (slot == "phone") return "phone number";
  if (slot == "postcode") return "post code";
  return slot;
}

class UserSimulator {
 public:
  UserSimulator(Rng& rng, const DomainDb& db) : rng_(rng), db_(db) {}

  Goal sample_goal() {
    Goal g;
    if (rng_.chance(0.75)) {
      const auto& row = db_.rows()[rng_.below(db_.size())];
      g.constraints = {{"food", row.food}, {"area", row.area}, {"pricerange", row.pricerange}};
    } else {
      for (auto slot : kInformableSlots) {
        const auto values = db_.values_of(slot);
        g.constraints[std::string(slot)] = values[rng_.below(values.size())];
      }
    }
    for (const char* slot : {"address", "phone", "postcode"}) {
      if (rng_.chance(0.5)) g.requests.emplace_back(slot);
    }
    if (rng_.chance(0.1)) g.requests.insert(g.requests.begin(), "name");
    return g;
  }

  std::string pick(const std::vector<std::string>& options) {
    return options[rng_.below(options.size())];
  }

  std::string inform_text(const SlotMap& informed) {
    std::vector<std::string> parts;
    if (auto it = informed.find("food"); it != informed.end()) parts.push_back(fill(pick(kFoodPhrases), it->second));
    if (auto it = informed.find("area"); it != informed.end()) parts.push_back(fill(pick(kAreaPhrases), it->second));
    if (auto it = informed.find("pricerange"); it != informed.end()) {
      parts.push_back(fill(pick(kPricePhrases), it->second));
    }
    std::string text = pick(kOpeners);
    for (std::size_t i = 0; i < parts.size(); ++i) text += (i ? " " : "") + parts[i];
    return text;
  }

  std::string request_text(const std::set<std::string>& slots) {
    std::string list;
    std::size_t i = 0;
    for (const auto& s : slots) {
      if (i) list += (i + 1 == slots.size()) ? " and " : " ";
      list += request_phrase(s);
      ++i;
    }
    return fill(pick(kRequestLeads), list);
  }

  Rng& rng() { return rng_; }

 private:
  Rng& rng_;
  const DomainDb& db_;
};

}  // namespace

std::vector<AnnotatedDialogue> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_dialogues,
                                                         const Rulebook& rulebook, const DomainDb& db) {
  if (n_dialogues == 0) throw Error(ErrorCode::InvalidArgument, "n_dialogues must be at least 1");
  if (db.size() == 0) throw Error(ErrorCode::InvalidArgument, "simulator needs a nonempty db");

  const auto offer_alternative = rulebook.find_action("OfferAlternative");
  const std::shared_ptr<const Rulebook> rb(&rulebook, [](const Rulebook*) {});
  const std::shared_ptr<const DomainDb> dbp(&db, [](const DomainDb*) {});

  Rng rng(seed);
  UserSimulator user(rng, db);
  std::vector<AnnotatedDialogue> corpus;

  for (std::size_t n = 0; n < n_dialogues; ++n) {
    char id[48];
    std::snprintf(id, sizeof id, "sim%llu-%04zu", static_cast<unsigned long long>(seed), n);
    AnnotatedDialogue dialogue{id, {}};
    DialogueSession session(rb, dbp, nullptr, nullptr, id);

    auto play = [&](std::string utterance, SemanticFrame frame) {
      const Event event = turn_event(dialogue.turns.size(), frame);
      const TurnResult result = session.run_turn(event, frame, utterance, Policy::Rules);
      if (result.winner_sequence.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "rulebook produced no action for a simulated turn in " + dialogue.id);
      }
      AnnotatedTurn turn{std::move(utterance), std::move(frame), {}, result.response};
      for (int a : result.winner_sequence) turn.action_labels.push_back(rulebook.action(a).name);
      dialogue.turns.push_back(std::move(turn));
    };

    play("", SemanticFrame{"hello", {}, {}});

    Goal goal = user.sample_goal();
    std::set<std::string> asked;
    constexpr std::size_t kMaxUserTurns = 14;
    bool done = false;
    while (!done && dialogue.turns.size() < kMaxUserTurns) {
      const DialogueState& st = session.state();
      std::vector<std::string> pending;
      for (const auto& [slot, value] : goal.constraints) {
        if (!st.filled(slot)) pending.push_back(slot);
      }
      std::vector<std::string> remaining;
      for (const auto& r : goal.requests) {
        if (!asked.contains(r)) remaining.push_back(r);
      }
      const bool offered = st.flag("offered");

      SemanticFrame frame;
      std::string text;
      if (offer_alternative && st.last_action == *offer_alternative) {
        std::vector<std::string> areas;
        for (const auto& area : db.values_of("area")) {
          if (area == goal.constraints["area"]) continue;
          SlotMap probe = goal.constraints;
          probe["area"] = area;
          if (!db_lookup(db, probe).empty()) areas.push_back(area);
        }
        if (areas.empty()) break;
        goal.constraints["area"] = areas[rng.below(areas.size())];
        frame = {"inform", {{"area", goal.constraints["area"]}}, {}};
        text = fill(user.pick(kAlternativePhrases), goal.constraints["area"]);
      } else if (!pending.empty()) {
        std::set<std::string> chosen;
        std::string asked_for;
        if (st.last_action) {
          const auto& last = rulebook.action(*st.last_action).name;
          if (last == "RequestFood") asked_for = "food";
          if (last == "RequestArea") asked_for = "area";
          if (last == "RequestPrice") asked_for = "pricerange";
        }
        for (const auto& slot : pending) {
          if (slot == asked_for || rng.chance(asked_for.empty() ? 0.5 : 0.35)) chosen.insert(slot);
        }
        if (chosen.empty()) chosen.insert(pending[rng.below(pending.size())]);
        frame.intent = "inform";
        for (const auto& slot : chosen) frame.informed[slot] = goal.constraints[slot];
        text = user.inform_text(frame.informed);
        if (chosen.size() == pending.size() && !remaining.empty() && rng.chance(0.25)) {
          const std::string early = remaining[rng.below(remaining.size())];
          frame.requested.insert(early);
          asked.insert(early);
          text += " and " + user.request_text({early});
        }
      } else if (offered && !remaining.empty()) {
        for (const auto& r : remaining) {
          if (rng.chance(0.6)) frame.requested.insert(r);
        }
        if (frame.requested.empty()) frame.requested.insert(remaining[rng.below(remaining.size())]);
        asked.insert(frame.requested.begin(), frame.requested.end());
        frame.intent = "request";
        text = user.request_text(frame.requested);
      } else {
        done = true;
        break;
      }
      play(std::move(text), std::move(frame));
    }

    play(user.pick(kFarewells), SemanticFrame{std::string(kFarewellIntent), {}, {}});
    corpus.push_back(std::move(dialogue));
  }
  return corpus;
}

}  // namespace etadm
