#pragma once

#include "hawk/detect/pipeline.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>

namespace hawk::service {

using nlohmann::json;

struct ServiceConfig {
    std::filesystem::path dataDir = "hawk-data";
    std::filesystem::path modelDir; // empty: <dataDir>/model
    std::string token;              // empty disables authentication
    std::string bind = "127.0.0.1:8080";
    int topFeatures = 5;
    std::function<std::int64_t()> clock; // epoch seconds; defaults to the system clock

    // HAWK_DATA_DIR, HAWK_TOKEN, HAWK_BIND and HAWK_MODEL_DIR override the defaults.
    static ServiceConfig from_env();
};

struct HttpResult {
    int status = 200;
    json body;
};

HttpResult error_result(int status, const std::string& code, const std::string& message, const std::string& path = "");

// Workflow state behind the HTTP API. Files under dataDir:
//   reports.jsonl, ledger.jsonl, optimizer.jsonl  append-only logs
//   submissions/<reportId>.json                   the submitted match
//   corpus/matches, corpus/labels                 confirmed training corpus
//   banned.json                                   banned database, rebuilt from the ledger on start
class HawkService {
public:
    explicit HawkService(ServiceConfig cfg);

    // Loads <modelDir> when present. Returns false when no bundle is there.
    bool reload_model();
    void set_bundle(std::shared_ptr<const detect::HawkBundle> bundle);
    std::shared_ptr<const detect::HawkBundle> bundle() const;

    HttpResult submit_match(std::string_view body);
    HttpResult get_report(const std::string& id) const;
    HttpResult flagged(const std::string& status) const;
    HttpResult post_verdict(std::string_view body);
    HttpResult post_optimizer(std::string_view body);
    HttpResult banned_list() const;
    HttpResult health() const;

    std::size_t banned_count() const;
    std::vector<std::string> corpus_listing() const;
    // Canonical serialization of the banned database, decided verdicts and corpus listing.
    std::string state_snapshot() const;

    const ServiceConfig& config() const { return cfg_; }

private:
    struct PlayerVerdict {
        std::string matchId, verdict, gmId, timestampUtc, cheatType;
    };

    std::string now() const;
    void replay_logs();
    void rebuild_banned_file() const;
    void materialize_corpus(const std::string& reportId, const std::string& matchId) const;
    json evidence(const std::string& reportId, const json& player) const;
    // W, epsilon and D_HAWK of a stored player under the current fusion model.
    json current_entry(const json& report, const json& player, const detect::HawkBundle* b) const;
    void apply_logged_optimizer();

    ServiceConfig cfg_;
    mutable std::shared_mutex stateMu_; // reports and verdicts
    std::mutex writeMu_;                // serializes every file append
    mutable std::mutex modelMu_;
    std::shared_ptr<const detect::HawkBundle> bundle_;

    std::map<std::string, json> reports_;
    std::vector<std::string> reportOrder_;
    std::map<std::pair<std::string, std::string>, PlayerVerdict> verdicts_; // (reportId, steamId)
    std::set<std::pair<std::string, std::string>> banned_;                  // (matchId, steamId)
    std::uint64_t nextReport_ = 1;
};

} // namespace hawk::service
