#pragma once

#include "hawk/replay/match.hpp"

#include <string>
#include <string_view>

namespace hawk::replay {

// Parses a match in the canonical JSON schema. Unknown fields are ignored.
// View angles are normalized (yaw wrapped to [0,360), pitch clamped to
// [-90,90]) before validation. Throws SchemaError for missing or mistyped
// fields and ConsistencyError for cross-reference violations; both messages
// start with the offending JSON path.
MatchRecord parse_match_json(std::string_view bytes);

// Normalizes views in place and enforces every MatchRecord invariant.
void validate_match(MatchRecord& m);

// Canonical serialization. Derived `seconds` fields are emitted for
// consumers and ignored on parse, so parse(serialize(m)) == m.
std::string serialize_match(const MatchRecord& m, int indent = -1);

LabelSet parse_labels_json(std::string_view bytes);
std::string serialize_labels(const LabelSet& labels, int indent = -1);

} // namespace hawk::replay
