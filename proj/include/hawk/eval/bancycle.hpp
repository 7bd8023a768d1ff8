#pragma once

#include "hawk/replay/match.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace hawk::eval {

// One engine flag: the player was detected in a match at `timestampUtc`.
struct Detection {
    std::string matchId;
    std::string steamId;
    std::string timestampUtc;
};

struct BanCycleRow {
    std::string day; // YYYY-MM-DD, UTC
    std::int64_t engineDaily = 0, engineCumulative = 0;
    std::int64_t officialDaily = 0, officialCumulative = 0;
    bool operator==(const BanCycleRow&) const = default;
};

// Daily counts over every UTC day from the first to the last event. Official
// bans come from labels carrying banDateUtc.
std::vector<BanCycleRow> ban_cycle_report(std::span<const Detection> detections,
                                          std::span<const replay::LabelSet> labels);

std::string ban_cycle_csv(const std::vector<BanCycleRow>& rows);
nlohmann::json ban_cycle_json(const std::vector<BanCycleRow>& rows);

} // namespace hawk::eval
