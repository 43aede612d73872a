#include "etadm/frame_extractor.hpp"

#include <cctype>
#include <utility>

#include "etadm/runtime.hpp"
#include "etadm/text.hpp"

namespace etadm {

namespace {

std::vector<std::string> words_of(std::string_view text) {
  std::string cleaned;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    cleaned += std::isalnum(u) ? static_cast<char>(std::tolower(u)) : ' ';
  }
  return split_whitespace(cleaned);
}

// Start of the last occurrence of `needle` in `hay`, or -1.
long last_match(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return -1;
  for (std::size_t i = hay.size() - needle.size() + 1; i-- > 0;) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) return static_cast<long>(i);
  }
  return -1;
}

const std::pair<const char*, const char*> kSynonyms[] = {
    {"center", "centre"}, {"central", "centre"},      {"moderately", "moderate"},
    {"inexpensive", "cheap"}, {"pricey", "expensive"}, {"postcode", "post code"},
    {"telephone", "phone"}};

const std::pair<const char*, const char*> kRequestPhrases[] = {
    {"address", "address"}, {"phone", "phone"}, {"post code", "postcode"}, {"name", "name"}};

}  // namespace

SemanticFrame extract_frame(std::string_view utterance, const DomainDb& db) {
  std::vector<std::string> words;
  for (auto& w : words_of(utterance)) {
    std::string mapped = w;
    for (const auto& [from, to] : kSynonyms) {
      if (w == from) mapped = to;
    }
    for (auto& part : split_whitespace(mapped)) words.push_back(std::move(part));
  }

  SemanticFrame frame;
  for (auto slot : kInformableSlots) {
    long best = -1;
    for (const auto& value : db.values_of(slot)) {
      const long at = last_match(words, words_of(value));
      if (at > best) {
        best = at;
        frame.informed[std::string(slot)] = ascii_lower(value);
      }
    }
  }
  for (const auto& [phrase, slot] : kRequestPhrases) {
    if (last_match(words, words_of(phrase)) >= 0) frame.requested.insert(slot);
  }

  bool farewell = false;
  for (const auto& w : words) farewell = farewell || w == "bye" || w == "goodbye";
  if (farewell) {
    frame.intent = std::string(kFarewellIntent);
  } else if (!frame.informed.empty()) {
    frame.intent = "inform";
  } else if (!frame.requested.empty()) {
    frame.intent = "request";
  } else {
    frame.intent = "other";
  }
  return frame;
}

}  // namespace etadm
