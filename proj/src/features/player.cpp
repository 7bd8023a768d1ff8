#include "hawk/features/player.hpp"

#include "hawk/error.hpp"

namespace hawk::features {

PlayerSample extract_player(const MatchRecord& m, std::string_view steamId, const replay::LabelSet* labels,
                            const ExtractionConfig& cfg) {
    PlayerSample s;
    s.matchId = m.matchId;
    s.steamId = std::string(steamId);
    s.dateUtc = m.dateUtc;
    if (labels)
        if (const auto* l = labels->find(steamId)) {
            s.label = l->cheater ? 1 : 0;
            s.cheatType = l->cheatType;
        }
    s.streams = extract_streams(m, steamId, cfg.streams);
    s.v28 = feature_vector(m, steamId, cfg.features);
    return s;
}

std::vector<PlayerSample> extract_match(const MatchRecord& m, const replay::LabelSet* labels,
                                        const ExtractionConfig& cfg) {
    std::vector<PlayerSample> out;
    out.reserve(m.players.size());
    for (const auto& p : m.players) out.push_back(extract_player(m, p.steamId, labels, cfg));
    return out;
}

std::vector<PlayerSample> extract_samples(std::span<const replay::LabeledMatch> matches,
                                          const ExtractionConfig& cfg) {
    std::vector<PlayerSample> out;
    for (const auto& lm : matches) {
        auto part = extract_match(lm.match, &lm.labels, cfg);
        std::move(part.begin(), part.end(), std::back_inserter(out));
    }
    return out;
}

nlohmann::json to_json(const StructuredVector& v) {
    nlohmann::json values = nlohmann::json::object(), missing = nlohmann::json::array();
    for (int i = 0; i < kFeatureCount; ++i) {
        const auto k = static_cast<std::size_t>(i);
        values[std::string(kFeatureNames[k])] = v.values[k];
        if (v.missing[k]) missing.push_back(kFeatureNames[k]);
    }
    return {{"values", values}, {"missing", missing}};
}

StructuredVector structured_from_json(const nlohmann::json& j) {
    StructuredVector v;
    for (int i = 0; i < kFeatureCount; ++i) {
        const auto k = static_cast<std::size_t>(i);
        v.values[k] = j.at("values").at(std::string(kFeatureNames[k])).get<double>();
    }
    for (const auto& name : j.at("missing")) {
        const int i = feature_index(name.get<std::string>());
        if (i < 0) throw SchemaError("unknown feature '" + name.get<std::string>() + "'");
        v.missing[static_cast<std::size_t>(i)] = true;
    }
    return v;
}

nlohmann::json sample_to_json(const PlayerSample& s) {
    return {{"matchId", s.matchId},   {"steamId", s.steamId},
            {"dateUtc", s.dateUtc},   {"label", s.label},
            {"cheatType", replay::to_string(s.cheatType)},
            {"structured", to_json(s.v28)}, {"streams", streams_to_json(s.streams)}};
}

PlayerSample sample_from_json(const nlohmann::json& j) {
    PlayerSample s;
    s.matchId = j.at("matchId").get<std::string>();
    s.steamId = j.at("steamId").get<std::string>();
    s.dateUtc = j.value("dateUtc", std::string());
    s.label = j.value("label", 0);
    const auto ct = replay::cheat_type_from_string(j.value("cheatType", std::string("none")));
    if (!ct) throw SchemaError("unknown cheatType");
    s.cheatType = *ct;
    s.v28 = structured_from_json(j.at("structured"));
    s.streams = streams_from_json(j.at("streams"));
    return s;
}

} // namespace hawk::features
