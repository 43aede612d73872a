#pragma once

// Context and state features consumed by the learned trigger.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etadm/state.hpp"

namespace etadm {

enum class FeatureRole { Context, State, Fused };

struct FeatureVector {
  FeatureRole role = FeatureRole::Context;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  bool operator==(const FeatureVector&) const = default;
};

// ---------------------------------------------------------------------------
// State feature: 64 bits.
//
//   [0, 3)    slot filled: food, area, pricerange
//   [3, 7)    slot requested: name, address, phone, postcode
//   [7, 10)   last lookup result: zero, one, many (all clear before any lookup)
//   [10, 23)  action executed last in the current turn, one-hot by action id;
//             bit 22 (the "none" position) is kept clear
//   [23, 27)  turn count thermometer: t >= 1, t > 1, t > 2, t > 4
//   [27, 35)  auxiliary flags declared by the rulebook, by aux_bit
//   [35, 64)  reserved, always zero
namespace state_layout {
inline constexpr std::size_t kDim = 64;
inline constexpr std::size_t kFilled = 0;
inline constexpr std::size_t kRequested = 3;
inline constexpr std::size_t kDbBucket = 7;
inline constexpr std::size_t kLastAction = 10;
inline constexpr std::size_t kLastActionNone = 22;
inline constexpr std::size_t kTurnBucket = 23;
inline constexpr std::size_t kAux = 27;
inline constexpr std::size_t kReserved = 35;
}  // namespace state_layout

FeatureVector encode_state(const DialogueState& state);

// ---------------------------------------------------------------------------
// Context feature.

enum class EncoderKind { HashedNgram, Precomputed };

std::string_view to_string(EncoderKind kind);

struct ContextEncoderConfig {
  EncoderKind kind = EncoderKind::HashedNgram;
  std::size_t dim = 768;
  std::vector<int> ngram_orders = {1, 2};
  std::uint64_t seed = 0x5eedULL;
  // Precomputed kind: JSON map of turn key -> float array.
  std::string vectors_path;

  bool operator==(const ContextEncoderConfig&) const = default;
};

struct Utterance {
  std::string speaker;  // "usr" or "sys"
  std::string text;

  bool operator==(const Utterance&) const = default;
};

// Key identifying one turn for precomputed vectors: "<dialogue id>:<turn>".
std::string turn_key(std::string_view dialogue_id, std::size_t turn);

class ContextEncoder {
 public:
  virtual ~ContextEncoder() = default;

  /// Encodes the dialogue context of one turn. Empty utterances are skipped.
  virtual FeatureVector encode(std::span<const Utterance> history, std::string_view key) const = 0;

  const ContextEncoderConfig& config() const { return config_; }
  std::size_t dim() const { return config_.dim; }

  /// Builds the encoder a config describes; loads vectors for the
  /// precomputed kind.
  static std::shared_ptr<const ContextEncoder> create(const ContextEncoderConfig& config);

 protected:
  explicit ContextEncoder(ContextEncoderConfig config) : config_(std::move(config)) {}

 private:
  ContextEncoderConfig config_;
};

/// Concatenates `[usr] text [sys] text ...`, lowercases, splits on
/// whitespace and hashes the configured n-gram orders into `dim` buckets
/// with signed counts, then L2-normalizes. An empty context stays zero.
class HashedNgramEncoder final : public ContextEncoder {
 public:
  explicit HashedNgramEncoder(ContextEncoderConfig config);
  FeatureVector encode(std::span<const Utterance> history, std::string_view key) const override;
};

/// Looks up per-turn vectors computed by an external encoder.
class PrecomputedEncoder final : public ContextEncoder {
 public:
  PrecomputedEncoder(ContextEncoderConfig config, std::map<std::string, std::vector<double>> vectors);
  FeatureVector encode(std::span<const Utterance> history, std::string_view key) const override;

  static std::map<std::string, std::vector<double>> load_vectors(const std::filesystem::path& path);

 private:
  std::map<std::string, std::vector<double>> vectors_;
};

}  // namespace etadm
