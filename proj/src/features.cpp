#include "etadm/features.hpp"

#include <cmath>

#include "etadm/error.hpp"
#include "etadm/text.hpp"
#include "json.hpp"

namespace etadm {

FeatureVector encode_state(const DialogueState& state) {
  namespace L = state_layout;
  std::vector<double> bits(L::kDim, 0.0);

  std::size_t i = 0;
  for (auto slot : kInformableSlots) bits[L::kFilled + i++] = state.filled(slot) ? 1.0 : 0.0;
  i = 0;
  for (auto slot : kRequestableSlots) bits[L::kRequested + i++] = state.requested(slot) ? 1.0 : 0.0;

  if (state.db_queried) {
    const std::size_t bucket = state.db_result_count == 0 ? 0 : state.db_result_count == 1 ? 1 : 2;
    bits[L::kDbBucket + bucket] = 1.0;
  }

  if (state.mini_turn_index > 0 && state.last_action) {
    const auto id = static_cast<std::size_t>(*state.last_action);
    if (L::kLastAction + id < L::kLastActionNone) bits[L::kLastAction + id] = 1.0;
  }

  const std::int64_t t = state.turn_index;
  if (t >= 1) bits[L::kTurnBucket + 0] = 1.0;
  if (t > 1) bits[L::kTurnBucket + 1] = 1.0;
  if (t > 2) bits[L::kTurnBucket + 2] = 1.0;
  if (t > 4) bits[L::kTurnBucket + 3] = 1.0;

  for (const auto& v : state.variables) {
    if (v.aux_bit && v.kind == VarKind::Flag && std::get<bool>(v.value)) {
      bits[L::kAux + static_cast<std::size_t>(*v.aux_bit)] = 1.0;
    }
  }
  return {FeatureRole::State, std::move(bits)};
}

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::HashedNgram ? "hashed_ngram" : "precomputed";
}

std::string turn_key(std::string_view dialogue_id, std::size_t turn) {
  return std::string(dialogue_id) + ":" + std::to_string(turn);
}

std::shared_ptr<const ContextEncoder> ContextEncoder::create(const ContextEncoderConfig& config) {
  if (config.dim == 0) throw Error(ErrorCode::InvalidArgument, "context dim must be at least 1");
  if (config.kind == EncoderKind::HashedNgram) return std::make_shared<HashedNgramEncoder>(config);
  return std::make_shared<PrecomputedEncoder>(config,
                                              PrecomputedEncoder::load_vectors(config.vectors_path));
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

HashedNgramEncoder::HashedNgramEncoder(ContextEncoderConfig config)
    : ContextEncoder(std::move(config)) {
  for (int n : this->config().ngram_orders) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n-gram orders must be positive");
  }
}

FeatureVector HashedNgramEncoder::encode(std::span<const Utterance> history, std::string_view) const {
  std::string flat;
  for (const auto& u : history) {
    if (u.text.empty()) continue;
    flat += "[" + u.speaker + "] " + u.text + " ";
  }
  const auto tokens = split_whitespace(ascii_lower(flat));

  std::vector<double> v(dim(), 0.0);
  for (int n : config().ngram_orders) {
    const auto order = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string gram = std::to_string(order) + "|" + tokens[i];
      for (std::size_t k = 1; k < order; ++k) gram += " " + tokens[i + k];
      const std::uint64_t h = mix(fnv1a(gram, config().seed));
      v[h % dim()] += (h >> 63) ? -1.0 : 1.0;
    }
  }

  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return {FeatureRole::Context, std::move(v)};
}

PrecomputedEncoder::PrecomputedEncoder(ContextEncoderConfig config,
                                       std::map<std::string, std::vector<double>> vectors)
    : ContextEncoder(std::move(config)), vectors_(std::move(vectors)) {
  for (const auto& [key, vec] : vectors_) {
    if (vec.size() != dim()) {
      throw Error(ErrorCode::DimensionMismatch, "vector for '" + key + "' has length " +
                                                    std::to_string(vec.size()) + ", expected " +
                                                    std::to_string(dim()));
    }
  }
}

FeatureVector PrecomputedEncoder::encode(std::span<const Utterance>, std::string_view key) const {
  auto it = vectors_.find(std::string(key));
  if (it == vectors_.end()) {
    throw Error(ErrorCode::MissingVector, "no precomputed context vector for '" + std::string(key) + "'");
  }
  return {FeatureRole::Context, it->second};
}

std::map<std::string, std::vector<double>> PrecomputedEncoder::load_vectors(
    const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
    return doc.get<std::map<std::string, std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, "precomputed vectors '" + path.string() + "': " + e.what());
  }
}

}  // namespace etadm
