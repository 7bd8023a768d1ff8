#include "hawk/service/service.hpp"

#include "hawk/error.hpp"
#include "hawk/replay/json_io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hawk::service {

namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::string path_of(const std::string& message) {
    const auto colon = message.find(": ");
    return colon == std::string::npos ? std::string("$") : message.substr(0, colon);
}

void append_line(const fs::path& p, const json& record) {
    std::ofstream out(p, std::ios::app | std::ios::binary);
    if (!out) throw Error("IoError", "cannot append to " + p.string());
    out << record.dump() << '\n';
    out.flush();
    if (!out) throw Error("IoError", "cannot append to " + p.string());
}

// Complete lines only; a torn final line from an interrupted append is ignored.
std::vector<json> read_jsonl(const fs::path& p) {
    std::vector<json> out;
    if (!fs::exists(p)) return out;
    const std::string text = replay::read_file(p);
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) break;
        const std::string_view line(text.data() + start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw SchemaError(p.string() + ": malformed log line: " + e.what());
        }
    }
    return out;
}

json decision_json(const detect::Decision& d) { return {{"decision", d.decision}, {"score", d.score}}; }

detect::Decision decision_from(const json& j) { return {j.at("decision").get<int>(), j.at("score").get<double>()}; }

json mvin_summary(const eval::MvinModel& m) {
    return {{"lambda", m.lambda},
            {"epsilon", m.epsilon},
            {"objective", m.objective.to_json()},
            {"objectiveValue", m.objectiveValue},
            {"scoreMode", m.scoreMode},
            {"validation", eval::to_json(m.validation)},
            {"metrics", eval::to_json(eval::metrics(m.validation))}};
}

std::string report_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep-%06llu", static_cast<unsigned long long>(n));
    return buf;
}

} // namespace

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig c;
    c.dataDir = env_or("HAWK_DATA_DIR", c.dataDir.string());
    c.modelDir = env_or("HAWK_MODEL_DIR", "");
    c.token = env_or("HAWK_TOKEN", "");
    c.bind = env_or("HAWK_BIND", c.bind);
    return c;
}

HttpResult error_result(int status, const std::string& code, const std::string& message, const std::string& path) {
    json body = {{"error", code}, {"message", message}};
    if (!path.empty()) body["path"] = path;
    return {status, body};
}

HawkService::HawkService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.modelDir.empty()) cfg_.modelDir = cfg_.dataDir / "model";
    if (!cfg_.clock)
        cfg_.clock = [] {
            return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
                .count();
        };
    fs::create_directories(cfg_.dataDir / "submissions");
    fs::create_directories(cfg_.dataDir / "corpus" / "matches");
    fs::create_directories(cfg_.dataDir / "corpus" / "labels");
    replay_logs();
    reload_model();
}

std::string HawkService::now() const { return replay::format_utc(cfg_.clock()); }

void HawkService::replay_logs() {
    std::unique_lock lock(stateMu_);
    reports_.clear();
    reportOrder_.clear();
    verdicts_.clear();
    banned_.clear();
    nextReport_ = 1;
    for (auto& r : read_jsonl(cfg_.dataDir / "reports.jsonl")) {
        const auto id = r.at("reportId").get<std::string>();
        reportOrder_.push_back(id);
        nextReport_ = std::max<std::uint64_t>(nextReport_, std::stoull(id.substr(4)) + 1);
        reports_[id] = std::move(r);
    }
    for (const auto& rec : read_jsonl(cfg_.dataDir / "ledger.jsonl")) {
        PlayerVerdict v{rec.at("matchId").get<std::string>(), rec.at("gmVerdict").get<std::string>(),
                        rec.at("gmId").get<std::string>(), rec.at("timestamp").get<std::string>(),
                        rec.value("cheatType", "aimbot")};
        const auto key = std::make_pair(rec.at("reportId").get<std::string>(), rec.at("steamId").get<std::string>());
        if (v.verdict == "confirmed") banned_.insert({v.matchId, key.second});
        verdicts_[key] = v;
    }
    rebuild_banned_file();
    std::set<std::pair<std::string, std::string>> matches; // (matchId, a reportId holding it)
    for (const auto& [key, v] : verdicts_)
        if (v.verdict == "confirmed") matches.insert({v.matchId, key.first});
    std::set<std::string> done;
    for (const auto& [matchId, reportId] : matches)
        if (done.insert(matchId).second) materialize_corpus(reportId, matchId);
}

void HawkService::rebuild_banned_file() const {
    json list = json::array();
    for (const auto& [matchId, steamId] : banned_) list.push_back({{"matchId", matchId}, {"steamId", steamId}});
    replay::write_file(cfg_.dataDir / "banned.json", list.dump(2) + "\n");
}

void HawkService::materialize_corpus(const std::string& reportId, const std::string& matchId) const {
    const auto match = replay::parse_match_json(replay::read_file(cfg_.dataDir / "submissions" / (reportId + ".json")));
    replay::LabeledMatch lm{match, {}};
    lm.labels.matchId = matchId;
    for (const auto& p : match.players) {
        replay::PlayerLabel l;
        l.steamId = p.steamId;
        for (const auto& [key, v] : verdicts_) {
            if (v.verdict != "confirmed" || v.matchId != matchId || key.second != p.steamId) continue;
            l.cheater = true;
            l.cheatType = *replay::cheat_type_from_string(v.cheatType);
            l.banDateUtc = v.timestampUtc;
            break;
        }
        lm.labels.labels.push_back(l);
    }
    replay::save_labeled_match(cfg_.dataDir / "corpus", lm);
}

bool HawkService::reload_model() {
    if (!fs::exists(cfg_.modelDir / "bundle.json")) return false;
    set_bundle(std::make_shared<const detect::HawkBundle>(detect::HawkBundle::load(cfg_.modelDir)));
    apply_logged_optimizer();
    return true;
}

void HawkService::apply_logged_optimizer() {
    const auto records = read_jsonl(cfg_.dataDir / "optimizer.jsonl");
    auto current = bundle();
    if (records.empty() || !current) return;
    const auto& last = records.back();
    if (last.value("modelVersion", "") != current->modelVersion) return;
    auto next = std::make_shared<detect::HawkBundle>(*current);
    next->mvin = eval::MvinModel::from_json(last.at("mvin"));
    set_bundle(next);
}

void HawkService::set_bundle(std::shared_ptr<const detect::HawkBundle> b) {
    std::lock_guard lock(modelMu_);
    bundle_ = std::move(b);
}

std::shared_ptr<const detect::HawkBundle> HawkService::bundle() const {
    std::lock_guard lock(modelMu_);
    return bundle_;
}

HttpResult HawkService::submit_match(std::string_view body) {
    const auto b = bundle();
    if (!b) return error_result(503, "ModelNotLoaded", "no model bundle is loaded");
    replay::MatchRecord match;
    try {
        match = replay::parse_match_json(body);
    } catch (const ValidationError& e) {
        return error_result(400, e.code(), e.what(), path_of(e.what()));
    }
    const auto samples = features::extract_match(match, nullptr, b->config.extraction);
    json players = json::array();
    for (const auto& s : samples) {
        const auto d = b->detect(s);
        std::vector<int> order(features::kFeatureCount);
        for (int i = 0; i < features::kFeatureCount; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int x, int y) { return std::abs(d.z28(x)) > std::abs(d.z28(y)); });
        json top = json::array();
        for (int k = 0; k < std::min(cfg_.topFeatures, features::kFeatureCount); ++k) {
            const auto i = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
            top.push_back({{"feature", features::kFeatureNames[i]},
                           {"z", d.z28(static_cast<Eigen::Index>(i))},
                           {"value", s.v28.values[i]},
                           {"missing", s.v28.missing[i]}});
        }
        json z = json::object();
        for (std::size_t i = 0; i < features::kFeatureCount; ++i)
            z[std::string(features::kFeatureNames[i])] = d.z28(static_cast<Eigen::Index>(i));
        players.push_back({{"steamId", d.steamId},
                           {"pov", decision_json(d.pov)},
                           {"stats", decision_json(d.stats)},
                           {"spc", decision_json(d.spc)},
                           {"w", d.w},
                           {"epsilon", d.epsilon},
                           {"hawk", d.hawk},
                           {"topFeatures", top},
                           {"zscores", z}});
    }

    std::lock_guard write(writeMu_);
    std::string id;
    {
        std::shared_lock lock(stateMu_);
        id = report_id(nextReport_);
    }
    json report = {{"reportId", id},
                   {"matchId", match.matchId},
                   {"createdUtc", now()},
                   {"modelVersion", b->modelVersion},
                   {"lambda", b->mvin.lambda},
                   {"epsilon", b->mvin.epsilon},
                   {"scoreMode", b->mvin.scoreMode},
                   {"players", players}};
    replay::write_file(cfg_.dataDir / "submissions" / (id + ".json"), replay::serialize_match(match));
    append_line(cfg_.dataDir / "reports.jsonl", report);
    {
        std::unique_lock lock(stateMu_);
        reports_[id] = report;
        reportOrder_.push_back(id);
        ++nextReport_;
    }
    return {201, {{"reportId", id}, {"report", report}}};
}

HttpResult HawkService::get_report(const std::string& id) const {
    std::shared_lock lock(stateMu_);
    auto it = reports_.find(id);
    if (it == reports_.end()) return error_result(404, "UnknownReport", "no report '" + id + "'");
    json r = it->second;
    for (auto& p : r["players"]) {
        auto v = verdicts_.find({id, p.at("steamId").get<std::string>()});
        p["verdict"] = v == verdicts_.end() ? json(nullptr) : json(v->second.verdict);
    }
    return {200, r};
}

json HawkService::current_entry(const json& report, const json& player, const detect::HawkBundle* b) const {
    double w = player.at("w").get<double>();
    double eps = player.at("epsilon").get<double>();
    if (b) {
        const auto pov = decision_from(player.at("pov"));
        const auto stats = decision_from(player.at("stats"));
        const auto spc = decision_from(player.at("spc"));
        w = b->mvin.scoreMode ? eval::fuse_scores(b->mvin.lambda, pov.score, stats.score, spc.score)
                              : eval::fuse(b->mvin.lambda, pov.decision, stats.decision, spc.decision);
        eps = b->mvin.epsilon;
    }
    return {{"reportId", report.at("reportId")},
            {"matchId", report.at("matchId")},
            {"steamId", player.at("steamId")},
            {"pov", player.at("pov")},
            {"stats", player.at("stats")},
            {"spc", player.at("spc")},
            {"w", w},
            {"epsilon", eps},
            {"hawk", eval::decide_hawk(w, eps)}};
}

json HawkService::evidence(const std::string& reportId, const json& player) const {
    json timeline = json::array();
    const auto path = cfg_.dataDir / "submissions" / (reportId + ".json");
    if (fs::exists(path)) {
        const auto match = replay::parse_match_json(replay::read_file(path));
        const auto b = bundle();
        const auto cfg = b ? b->config.extraction.features : features::FeatureConfig{};
        struct Row {
            replay::Tick tick;
            int order;
            json body;
        };
        std::vector<Row> rows;
        const auto steamId = player.at("steamId").get<std::string>();
        for (const auto& e : features::segment_engagements(match, steamId, cfg)) {
            auto add = [&](std::optional<replay::Tick> t, int order, const char* phase) {
                if (!t) return;
                json body = {{"tick", *t},
                             {"seconds", static_cast<double>(*t) / match.tickRate},
                             {"round", e.roundNum},
                             {"phase", phase},
                             {"opponentId", e.opponentId}};
                if (order == 0 && e.rat) body["rat"] = *e.rat;
                if (order == 2 && e.raa) body["raa"] = *e.raa;
                rows.push_back({*t, order, body});
            };
            add(e.t0Tick, 0, "spot");
            add(e.t1Tick, 1, "fire");
            add(e.t2Tick, 2, "hit");
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.tick != b.tick ? a.tick < b.tick : a.order < b.order; });
        for (auto& r : rows) timeline.push_back(std::move(r.body));
    }
    return {{"zscores", player.at("zscores")}, {"topFeatures", player.at("topFeatures")}, {"timeline", timeline}};
}

HttpResult HawkService::flagged(const std::string& status) const {
    const std::string want = status.empty() ? "pending" : status;
    if (want != "pending" && want != "confirmed" && want != "rejected" && want != "all")
        return error_result(400, "SchemaError", "status must be pending, confirmed, rejected or all", "status");
    const auto b = bundle();
    std::vector<json> items;
    {
        std::shared_lock lock(stateMu_);
        for (const auto& id : reportOrder_) {
            const auto& report = reports_.at(id);
            for (const auto& p : report.at("players")) {
                json entry = current_entry(report, p, b.get());
                auto v = verdicts_.find({id, p.at("steamId").get<std::string>()});
                const std::string st = v == verdicts_.end() ? "pending" : v->second.verdict;
                if (st == "pending" && entry.at("hawk").get<int>() != 1) continue;
                if (want != "all" && st != want) continue;
                entry["status"] = st;
                entry["modelVersion"] = report.at("modelVersion");
                entry["evidence"] = evidence(id, p);
                items.push_back(std::move(entry));
            }
        }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const json& a, const json& b) { return a.at("w").get<double>() > b.at("w").get<double>(); });
    return {200, {{"status", want}, {"items", items}}};
}

HttpResult HawkService::post_verdict(std::string_view body) {
    json req;
    try {
        req = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_result(400, "SchemaError", std::string("invalid JSON: ") + e.what(), "$");
    }
    for (const char* key : {"reportId", "steamId", "verdict"})
        if (!req.is_object() || !req.contains(key) || !req.at(key).is_string())
            return error_result(400, "SchemaError", std::string("missing or non-string field '") + key + "'",
                                std::string("$.") + key);
    std::string verdict = req.at("verdict").get<std::string>();
    if (verdict == "confirm") verdict = "confirmed";
    if (verdict == "reject") verdict = "rejected";
    if (verdict != "confirmed" && verdict != "rejected")
        return error_result(400, "SchemaError", "verdict must be 'confirmed' or 'rejected'", "$.verdict");
    std::string cheatType = "aimbot";
    if (req.contains("cheatType")) {
        if (!req.at("cheatType").is_string()) return error_result(400, "SchemaError", "cheatType must be a string", "$.cheatType");
        cheatType = req.at("cheatType").get<std::string>();
        const auto c = replay::cheat_type_from_string(cheatType);
        if (!c || *c == replay::CheatType::None)
            return error_result(400, "SchemaError", "cheatType must be 'aimbot' or 'wallhack'", "$.cheatType");
    }
    const std::string gmId = req.contains("gmId") && req.at("gmId").is_string() ? req.at("gmId").get<std::string>() : "unknown";
    const auto reportId = req.at("reportId").get<std::string>();
    const auto steamId = req.at("steamId").get<std::string>();

    const auto b = bundle();
    std::lock_guard write(writeMu_);
    std::string matchId;
    {
        std::shared_lock lock(stateMu_);
        auto it = reports_.find(reportId);
        if (it == reports_.end()) return error_result(404, "UnknownReport", "no report '" + reportId + "'");
        if (verdicts_.count({reportId, steamId}))
            return error_result(409, "AlreadyDecided", "a verdict for " + steamId + " in " + reportId + " exists");
        const json* player = nullptr;
        for (const auto& p : it->second.at("players"))
            if (p.at("steamId") == steamId) player = &p;
        if (!player || current_entry(it->second, *player, b.get()).at("hawk").get<int>() != 1)
            return error_result(404, "UnknownReport", "no flagged entry for " + steamId + " in " + reportId);
        matchId = it->second.at("matchId").get<std::string>();
    }
    const json record = {{"reportId", reportId}, {"steamId", steamId},   {"matchId", matchId},
                         {"gmVerdict", verdict}, {"gmId", gmId},         {"timestamp", now()},
                         {"cheatType", verdict == "confirmed" ? cheatType : "none"}};
    append_line(cfg_.dataDir / "ledger.jsonl", record);
    std::size_t bannedCount = 0;
    {
        std::unique_lock lock(stateMu_);
        verdicts_[{reportId, steamId}] = {matchId, verdict, gmId, record.at("timestamp").get<std::string>(),
                                          record.at("cheatType").get<std::string>()};
        if (verdict == "confirmed") {
            banned_.insert({matchId, steamId});
            rebuild_banned_file();
            materialize_corpus(reportId, matchId);
        }
        bannedCount = banned_.size();
    }
    return {201, {{"record", record}, {"bannedCount", bannedCount}}};
}

HttpResult HawkService::post_optimizer(std::string_view body) {
    const auto b = bundle();
    if (!b) return error_result(503, "ModelNotLoaded", "no model bundle is loaded");
    eval::Objective objective;
    try {
        const json req = json::parse(body);
        if (!req.is_object() || !req.contains("objective"))
            return error_result(400, "SchemaError", "missing field 'objective'", "$.objective");
        objective = eval::Objective::from_json(req.at("objective"));
    } catch (const json::exception& e) {
        return error_result(400, "SchemaError", e.what(), "$.objective");
    } catch (const ConfigError& e) {
        return error_result(400, e.code(), e.what(), "$.objective");
    }
    eval::MvinModel next;
    try {
        next = b->reoptimize(objective);
    } catch (const InfeasibleConstraint& e) {
        return error_result(422, e.code(), e.what());
    } catch (const DegenerateClass& e) {
        return error_result(422, e.code(), e.what());
    }
    std::lock_guard write(writeMu_);
    auto swapped = std::make_shared<detect::HawkBundle>(*b);
    swapped->mvin = next;
    append_line(cfg_.dataDir / "optimizer.jsonl",
                {{"timestamp", now()}, {"modelVersion", b->modelVersion}, {"mvin", next.to_json()}});
    set_bundle(swapped);
    return {200, {{"old", mvin_summary(b->mvin)}, {"new", mvin_summary(next)}}};
}

HttpResult HawkService::banned_list() const {
    std::shared_lock lock(stateMu_);
    json list = json::array();
    for (const auto& [matchId, steamId] : banned_) list.push_back({{"matchId", matchId}, {"steamId", steamId}});
    return {200, {{"count", banned_.size()}, {"banned", list}}};
}

HttpResult HawkService::health() const {
    const auto b = bundle();
    std::shared_lock lock(stateMu_);
    return {200,
            {{"status", "ok"},
             {"modelLoaded", static_cast<bool>(b)},
             {"modelVersion", b ? json(b->modelVersion) : json(nullptr)},
             {"reports", reports_.size()}}};
}

std::size_t HawkService::banned_count() const {
    std::shared_lock lock(stateMu_);
    return banned_.size();
}

std::vector<std::string> HawkService::corpus_listing() const {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(cfg_.dataDir / "corpus" / "matches"))
        if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::string HawkService::state_snapshot() const {
    std::shared_lock lock(stateMu_);
    json banned = json::array();
    for (const auto& [matchId, steamId] : banned_) banned.push_back({matchId, steamId});
    json decided = json::array();
    for (const auto& [key, v] : verdicts_) decided.push_back({key.first, key.second, v.verdict, v.timestampUtc});
    json corpus = json::array();
    for (const auto& id : corpus_listing()) {
        corpus.push_back({id, replay::read_file(cfg_.dataDir / "corpus" / "labels" / (id + ".json"))});
    }
    return json{{"banned", banned}, {"decided", decided}, {"corpus", corpus}, {"reports", reportOrder_}}.dump();
}

} // namespace hawk::service
