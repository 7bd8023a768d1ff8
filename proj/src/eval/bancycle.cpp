#include "hawk/eval/bancycle.hpp"

#include <map>

namespace hawk::eval {

namespace {

std::int64_t day_of(const std::string& iso) {
    const std::int64_t t = replay::parse_utc(iso);
    return t >= 0 ? t / 86400 : (t - 86399) / 86400;
}

} // namespace

std::vector<BanCycleRow> ban_cycle_report(std::span<const Detection> detections,
                                          std::span<const replay::LabelSet> labels) {
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> perDay;
    for (const auto& d : detections) ++perDay[day_of(d.timestampUtc)].first;
    for (const auto& set : labels)
        for (const auto& l : set.labels)
            if (l.cheater && l.banDateUtc) ++perDay[day_of(*l.banDateUtc)].second;
    std::vector<BanCycleRow> rows;
    if (perDay.empty()) return rows;
    std::int64_t engine = 0, official = 0;
    for (std::int64_t day = perDay.begin()->first; day <= perDay.rbegin()->first; ++day) {
        BanCycleRow r;
        r.day = replay::format_utc(day * 86400).substr(0, 10);
        if (auto it = perDay.find(day); it != perDay.end()) {
            r.engineDaily = it->second.first;
            r.officialDaily = it->second.second;
        }
        engine += r.engineDaily;
        official += r.officialDaily;
        r.engineCumulative = engine;
        r.officialCumulative = official;
        rows.push_back(r);
    }
    return rows;
}

std::string ban_cycle_csv(const std::vector<BanCycleRow>& rows) {
    std::string out = "day,engine_daily,engine_cumulative,official_daily,official_cumulative\n";
    for (const auto& r : rows)
        out += r.day + "," + std::to_string(r.engineDaily) + "," + std::to_string(r.engineCumulative) + "," +
               std::to_string(r.officialDaily) + "," + std::to_string(r.officialCumulative) + "\n";
    return out;
}

nlohmann::json ban_cycle_json(const std::vector<BanCycleRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows)
        out.push_back({{"day", r.day},
                       {"engine", {{"daily", r.engineDaily}, {"cumulative", r.engineCumulative}}},
                       {"official", {{"daily", r.officialDaily}, {"cumulative", r.officialCumulative}}}});
    return out;
}

} // namespace hawk::eval
