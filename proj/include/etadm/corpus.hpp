#pragma once

// Action-annotated dialogues, the replay that turns them into training
// records, and the user simulator that synthesizes them.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "etadm/features.hpp"
#include "etadm/model.hpp"
#include "etadm/rulebook.hpp"
#include "etadm/state.hpp"

namespace etadm {

struct AnnotatedTurn {
  std::string user_utterance;
  SemanticFrame frame;
  std::vector<std::string> action_labels;  // STOP is implicit
  std::string system_response;

  bool operator==(const AnnotatedTurn&) const = default;
};

struct AnnotatedDialogue {
  std::string id;
  std::vector<AnnotatedTurn> turns;

  bool operator==(const AnnotatedDialogue&) const = default;
};

inline constexpr int kCorpusFormatVersion = 1;

/// Parses and validates a corpus file against a rulebook. Violations raise
/// SchemaError (or UnknownActionLabel) naming the offending location.
std::vector<AnnotatedDialogue> parse_corpus(std::string_view json_text, const Rulebook& rulebook);
std::vector<AnnotatedDialogue> load_corpus(const std::filesystem::path& path, const Rulebook& rulebook);

struct GeneratorInfo {
  std::uint64_t seed = 0;
  std::size_t count = 0;
};

std::string serialize_corpus(std::span<const AnnotatedDialogue> dialogues,
                             const GeneratorInfo* generator = nullptr);
void save_corpus(std::span<const AnnotatedDialogue> dialogues, const std::filesystem::path& path,
                 const GeneratorInfo* generator = nullptr);

/// Dialogue context of one turn: every earlier user and system utterance
/// plus the current user utterance.
std::vector<Utterance> context_before(const AnnotatedDialogue& dialogue, std::size_t turn);

/// Data-collection mode. For every turn: encode the context once, start the
/// turn, then for each labeled action emit (state feature, action) and
/// execute it; finally emit one (state feature, STOP) record. A turn with k
/// labels yields k + 1 records.
std::vector<MiniTurnRecord> collect_records(std::span<const AnnotatedDialogue> corpus,
                                            const Rulebook& rulebook, const DomainDb& db,
                                            const ContextEncoder& encoder);

/// Splits at dialogue granularity after a seeded shuffle of dialogue ids;
/// floor(train_fraction * dialogues) go to train. Throws EmptySplit when
/// train would be empty.
std::pair<std::vector<MiniTurnRecord>, std::vector<MiniTurnRecord>> split_records(
    std::span<const MiniTurnRecord> records, double train_fraction, std::uint64_t seed);

/// Distinct dialogue ids in first-appearance order.
std::vector<std::string> dialogue_ids(std::span<const MiniTurnRecord> records);

// Records files hold one JSON object per line.
std::string serialize_record(const MiniTurnRecord& record);
MiniTurnRecord parse_record(std::string_view line);
void save_records(std::span<const MiniTurnRecord> records, const std::filesystem::path& path);
std::vector<MiniTurnRecord> load_records(const std::filesystem::path& path);

/// Seeded user simulator: samples a goal, talks to a rules-only DM and
/// records the DM's actions and responses as labels. Same inputs give an
/// identical corpus.
std::vector<AnnotatedDialogue> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_dialogues,
                                                         const Rulebook& rulebook, const DomainDb& db);

}  // namespace etadm
