#pragma once

#include "hawk/replay/match.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace hawk::features {

using replay::MatchRecord;
using replay::Tick;

enum class StreamKind { Damage, AuxiliaryProps, OffensiveProps, Elimination, WeaponFire, Movement, Economy };
inline constexpr int kStreamCount = 7;
inline constexpr std::array<StreamKind, kStreamCount> kAllStreams{
    StreamKind::Damage,     StreamKind::AuxiliaryProps, StreamKind::OffensiveProps, StreamKind::Elimination,
    StreamKind::WeaponFire, StreamKind::Movement,       StreamKind::Economy};

std::string_view to_string(StreamKind k);
std::optional<StreamKind> stream_from_string(std::string_view s);

// Bumped whenever a column is added, removed or reordered.
inline constexpr int kColumnMapVersion = 1;

const std::vector<std::string>& column_names(StreamKind k);
inline int stream_width(StreamKind k) { return static_cast<int>(column_names(k).size()); }
// {"version": .., "streams": {"damage": [..columns..], ...}}
nlohmann::ordered_json column_map_json();

// weaponClass one-hot order; anything unrecognized maps to "other".
inline constexpr std::array<std::string_view, 6> kWeaponClasses{"pistol", "smg", "heavy", "rifle", "sniper", "other"};

struct StreamConfig {
    int movementStride = 16; // keep a frame when tick >= last kept + stride, per round
};

using Sequence = Eigen::MatrixXd; // rows = steps, cols = stream width

struct TemporalStreams {
    std::array<Sequence, kStreamCount> seq;
    Sequence& operator[](StreamKind k) { return seq[static_cast<std::size_t>(k)]; }
    const Sequence& operator[](StreamKind k) const { return seq[static_cast<std::size_t>(k)]; }
};

// One row per event where the player is the actor (attacker, shooter,
// thrower); movement rows come from the player's frames, economy rows from
// their economy records ordered by round. Throws UnknownPlayer.
TemporalStreams extract_streams(const MatchRecord& match, std::string_view steamId, const StreamConfig& cfg = {});

nlohmann::json streams_to_json(const TemporalStreams& s);
TemporalStreams streams_from_json(const nlohmann::json& j);

} // namespace hawk::features
