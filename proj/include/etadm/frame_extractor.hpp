#pragma once

// Keyword and gazetteer frame extraction for typed utterances. Only a
// stand-in for real NLU; gold frames always take precedence.

#include <string_view>

#include "etadm/state.hpp"

namespace etadm {

/// Informed slots come from the db's value inventory (last mention wins),
/// requested slots from a small phrase table; "bye"/"goodbye" make the
/// intent the farewell intent.
SemanticFrame extract_frame(std::string_view utterance, const DomainDb& db);

}  // namespace etadm
