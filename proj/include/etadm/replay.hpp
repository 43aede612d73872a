#pragma once

// Replays annotated dialogues through live sessions (gold frames, the
// session's own responses as context) and compares winner sequences with
// the labels.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "etadm/corpus.hpp"
#include "etadm/runtime.hpp"

namespace etadm {

struct ReplayMismatch {
  std::string dialogue_id;
  std::size_t turn = 0;
  std::vector<std::string> expected;
  std::vector<std::string> actual;
};

struct ReplayReport {
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t matching_turns = 0;
  std::size_t truncated_turns = 0;
  std::vector<ReplayMismatch> mismatches;

  double turn_agreement() const { return turns ? static_cast<double>(matching_turns) / static_cast<double>(turns) : 0.0; }
};

ReplayReport replay_corpus(std::span<const AnnotatedDialogue> corpus, std::shared_ptr<const Rulebook> rulebook,
                           std::shared_ptr<const DomainDb> db, std::shared_ptr<const ModelParams> model,
                           Policy policy, std::shared_ptr<const ContextEncoder> encoder = nullptr);

std::string replay_to_json(const ReplayReport& report);
std::string replay_to_text(const ReplayReport& report);

}  // namespace etadm
