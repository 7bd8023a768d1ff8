#include "cli.hpp"

#include "hawk/detect/pipeline.hpp"
#include "hawk/error.hpp"
#include "hawk/eval/bancycle.hpp"
#include "hawk/features/ranking.hpp"
#include "hawk/replay/json_io.hpp"
#include "hawk/service/http.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace hawk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Pipeline configuration JSON")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Seed applied to every component");
}

detect::PipelineConfig pipeline_config(const Common& c) {
    auto cfg = c.config.empty() ? detect::PipelineConfig{} : detect::load_pipeline_config(c.config);
    if (c.seed) cfg.set_seed(*c.seed);
    return cfg;
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    replay::write_file(path, text);
}

// "aimbot:2,wallhack:1"
std::vector<replay::CheaterQuota> parse_quotas(const std::string& s) {
    std::vector<replay::CheaterQuota> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        const auto kind = replay::profile_kind_from_string(item.substr(0, colon));
        if (!kind || *kind == replay::ProfileKind::Honest) throw ConfigError("unknown cheater profile in '" + item + "'");
        replay::CheaterQuota q{*kind, 1};
        if (colon != std::string::npos) {
            try {
                q.perMatch = std::stoi(item.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad cheater count in '" + item + "'");
            }
        }
        out.push_back(q);
    }
    return out;
}

replay::LabeledMatch unlabeled(const fs::path& file) {
    auto match = replay::parse_match_json(replay::read_file(file));
    replay::LabelSet labels;
    labels.matchId = match.matchId;
    return {std::move(match), std::move(labels)};
}

// A dataset directory (matches/ + labels/), a bare directory of match files, or one match file.
std::vector<replay::LabeledMatch> load_input(const std::string& path) {
    if (!fs::is_directory(path)) return {unlabeled(path)};
    if (fs::is_directory(fs::path(path) / "matches")) return replay::load_dataset(path);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<replay::LabeledMatch> out;
    for (const auto& f : files) out.push_back(unlabeled(f));
    return out;
}

std::vector<json> read_jsonl(const std::string& path) {
    std::vector<json> out;
    std::istringstream in(replay::read_file(path));
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw SchemaError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::map<std::pair<std::string, std::string>, int> label_map(std::span<const replay::LabelSet> sets) {
    std::map<std::pair<std::string, std::string>, int> m;
    for (const auto& s : sets)
        for (const auto& l : s.labels) m[{s.matchId, l.steamId}] = l.cheater ? 1 : 0;
    return m;
}

std::vector<replay::LabelSet> load_labels(const std::string& path) {
    std::vector<replay::LabelSet> out;
    if (fs::is_directory(path)) {
        const fs::path dir = fs::is_directory(fs::path(path) / "labels") ? fs::path(path) / "labels" : fs::path(path);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back(replay::parse_labels_json(replay::read_file(f)));
    } else {
        out.push_back(replay::parse_labels_json(replay::read_file(path)));
    }
    return out;
}

json subsystem_eval(const std::vector<int>& pred, const std::vector<double>& score, const std::vector<int>& labels,
                    bool haveScores) {
    const auto c = eval::confusion(pred, labels);
    json j = {{"confusion", eval::to_json(c)}, {"metrics", eval::to_json(eval::metrics(c))}, {"auc", nullptr}};
    if (haveScores) {
        try {
            j["auc"] = eval::auc_roc(score, labels);
        } catch (const DegenerateClass&) {
        }
    }
    return j;
}

std::atomic<httplib::Server*> gServer{nullptr};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hawk: multi-view cheat detection pipeline", "hawk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hawk 1.0");

    // synth
    Common synthCommon;
    replay::DatasetSpec spec;
    std::string synthOut, cheaters = "aimbot:1";
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    add_common(synth, synthCommon);
    synth->add_option("--players", spec.playersPerMatch, "Players per match")->check(CLI::Range(2, 64));
    synth->add_option("--matches", spec.matches, "Number of matches")->check(CLI::PositiveNumber);
    synth->add_option("--rounds", spec.rounds, "Rounds per match")->check(CLI::PositiveNumber);
    synth->add_option("--cheaters", cheaters, "Cheater quotas per match, e.g. aimbot:2,wallhack:1");
    synth->add_flag("--alternate", spec.alternateKinds, "Alternate cheat kinds across matches");
    synth->add_option("--sophistication", spec.sophistication, "0 = blatant, 1 = cautious")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--start-date", spec.startDateUtc, "UTC date of the first match");
    synth->add_option("--hours-between", spec.hoursBetweenMatches, "Hours between consecutive matches");
    synth->add_option("--frame-stride", spec.match.frameStride, "Ticks between movement frames")->check(CLI::PositiveNumber);
    synth->add_option("--out", synthOut, "Output directory")->required();

    // extract
    Common extractCommon;
    std::string extractData, extractOut;
    auto* extract = app.add_subcommand("extract", "Extract temporal streams and structured features");
    add_common(extract, extractCommon);
    extract->add_option("--in,--data", extractData, "Dataset directory, matches directory or match JSON")
        ->required()
        ->check(CLI::ExistingPath);
    extract->add_option("--out", extractOut, "Output directory, one JSON per match (default JSONL on stdout)");

    // train
    Common trainCommon;
    std::string trainData, trainOut;
    auto* train = app.add_subcommand("train", "Train every subsystem and the fusion model");
    add_common(train, trainCommon);
    train->add_option("--data", trainData, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--out", trainOut, "Model bundle directory")->required();

    // detect
    std::string detectModel, detectData, detectOut;
    auto* detectCmd = app.add_subcommand("detect", "Produce cheat reports for matches");
    detectCmd->add_option("--model", detectModel, "Model bundle directory")->required()->check(CLI::ExistingDirectory);
    detectCmd->add_option("--data", detectData, "Dataset directory or match JSON")->required()->check(CLI::ExistingPath);
    detectCmd->add_option("--out", detectOut, "Output JSONL, one report per match (default stdout)");

    // eval
    std::string evalPred, evalLabels, evalOut;
    auto* evalCmd = app.add_subcommand("eval", "Score predictions against labels");
    evalCmd->add_option("--pred", evalPred, "Reports written by detect")->required()->check(CLI::ExistingFile);
    evalCmd->add_option("--labels", evalLabels, "Dataset directory, labels directory or labels file")
        ->required()
        ->check(CLI::ExistingPath);
    evalCmd->add_option("--out", evalOut, "Output JSON (default stdout)");

    // robustness
    Common robCommon;
    std::string robData, robOut;
    int partitionSize = 40;
    auto* rob = app.add_subcommand("robustness", "Train on growing date-ordered prefixes");
    add_common(rob, robCommon);
    rob->add_option("--data", robData, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    rob->add_option("--partition-size", partitionSize, "Matches per partition")->check(CLI::PositiveNumber);
    rob->add_option("--out", robOut, "Output CSV (default stdout)");

    // rank
    Common rankCommon;
    std::string rankData, rankOut;
    auto* rank = app.add_subcommand("rank", "Rank structured features by Mann-Whitney p-value");
    add_common(rank, rankCommon);
    rank->add_option("--data", rankData, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    rank->add_option("--out", rankOut, "Output CSV (default stdout)");

    // bancycle
    std::string banPred, banLabels, banOut;
    bool banJson = false;
    auto* ban = app.add_subcommand("bancycle", "Daily engine detections against official bans");
    ban->add_option("--pred", banPred, "Reports written by detect")->required()->check(CLI::ExistingFile);
    ban->add_option("--labels", banLabels, "Dataset directory, labels directory or labels file")
        ->required()
        ->check(CLI::ExistingPath);
    ban->add_option("--out", banOut, "Output file (default stdout)");
    ban->add_flag("--json", banJson, "Write JSON instead of CSV");

    // serve
    service::ServiceConfig serveCfg = service::ServiceConfig::from_env();
    std::string serveData, serveModel, serveBind;
    auto* serve = app.add_subcommand("serve", "Run the review service");
    serve->add_option("--data-dir", serveData, "State directory (HAWK_DATA_DIR)");
    serve->add_option("--model", serveModel, "Model bundle directory (default <data-dir>/model)");
    serve->add_option("--bind", serveBind, "host:port (HAWK_BIND)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "hawk 1.0\n";
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "hawk: " << e.what() << "\n";
        auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 2;
    }

    try {
        if (*synth) {
            if (synthCommon.seed) spec.seed = *synthCommon.seed;
            spec.cheaters = parse_quotas(cheaters);
            const auto data = replay::generate_synthetic_dataset(spec);
            replay::save_dataset(synthOut, data);
            out << "wrote " << data.size() << " matches to " << synthOut << "\n";
        } else if (*extract) {
            const auto cfg = pipeline_config(extractCommon);
            std::string text;
            std::size_t written = 0;
            for (const auto& m : load_input(extractData)) {
                const auto* labels = m.labels.labels.empty() ? nullptr : &m.labels;
                json players = json::array();
                for (const auto& s : features::extract_match(m.match, labels, cfg.extraction)) {
                    json mask = json::array();
                    for (bool b : s.v28.missing) mask.push_back(b ? 1 : 0);
                    players.push_back({{"steamId", s.steamId},
                                       {"v28", s.v28.values},
                                       {"mask", std::move(mask)},
                                       {"streams", features::streams_to_json(s.streams)}});
                }
                const json doc{{"matchId", m.match.matchId}, {"players", std::move(players)}};
                if (extractOut.empty() || extractOut == "-") {
                    text += doc.dump() + "\n";
                } else {
                    fs::create_directories(extractOut);
                    replay::write_file(fs::path(extractOut) / (m.match.matchId + ".json"), doc.dump() + "\n");
                    ++written;
                }
            }
            if (extractOut.empty() || extractOut == "-") out << text;
            else out << "wrote " << written << " feature files to " << extractOut << "\n";
        } else if (*train) {
            const auto cfg = pipeline_config(trainCommon);
            const auto data = replay::load_dataset(trainData);
            const auto split = detect::split_samples(data, cfg);
            detect::TrainingReport rep;
            const auto bundle = detect::train_bundle(split.train, split.validation, cfg, &rep);
            bundle.save(trainOut);
            json summary = rep.to_json();
            summary["modelVersion"] = bundle.modelVersion;
            summary["mvin"] = bundle.mvin.to_json();
            if (!split.test.empty()) summary["test"] = detect::to_json(detect::evaluate(bundle.detect_all(split.test)));
            replay::write_file(fs::path(trainOut) / "training.json", summary.dump(2) + "\n");
            out << "model " << bundle.modelVersion << " written to " << trainOut << "\n";
        } else if (*detectCmd) {
            const auto bundle = detect::HawkBundle::load(detectModel);
            std::string text;
            for (const auto& m : load_input(detectData)) {
                json players = json::array();
                for (const auto& s : features::extract_match(m.match, &m.labels, bundle.config.extraction)) {
                    auto p = detect::to_json(bundle.detect(s));
                    p.erase("label");
                    players.push_back(std::move(p));
                }
                text += json{{"matchId", m.match.matchId},
                             {"dateUtc", m.match.dateUtc},
                             {"modelVersion", bundle.modelVersion},
                             {"lambda", bundle.mvin.lambda},
                             {"epsilon", bundle.mvin.epsilon},
                             {"players", players}}
                            .dump() +
                        "\n";
            }
            write_output(detectOut, text, out);
        } else if (*evalCmd) {
            const auto labels = label_map(load_labels(evalLabels));
            std::map<std::string, std::vector<int>> pred;
            std::map<std::string, std::vector<double>> score;
            std::vector<int> truth;
            std::set<std::string> haveScore;
            for (const auto& report : read_jsonl(evalPred)) {
                const auto matchId = report.at("matchId").get<std::string>();
                for (const auto& p : report.at("players")) {
                    const auto steamId = p.at("steamId").get<std::string>();
                    const auto it = labels.find({matchId, steamId});
                    if (it == labels.end()) throw ConsistencyError("no label for " + matchId + "/" + steamId);
                    truth.push_back(it->second);
                    pred["hawk"].push_back(p.at("hawk").get<int>());
                    score["hawk"].push_back(p.value("w", static_cast<double>(p.at("hawk").get<int>())));
                    if (p.contains("w")) haveScore.insert("hawk");
                    for (const char* sub : {"pov", "stats", "spc"}) {
                        if (!p.contains(sub)) continue;
                        pred[sub].push_back(p.at(sub).at("decision").get<int>());
                        score[sub].push_back(p.at(sub).at("score").get<double>());
                        haveScore.insert(sub);
                    }
                }
            }
            json result = {{"players", truth.size()}};
            const std::map<std::string, std::string> names{
                {"hawk", "hawk"}, {"pov", "revpov"}, {"stats", "revstats"}, {"spc", "exspc"}};
            for (const auto& [key, p] : pred) {
                if (p.size() != truth.size()) continue;
                result[names.at(key)] = subsystem_eval(p, score[key], truth, haveScore.count(key) > 0);
            }
            write_output(evalOut, result.dump(2) + "\n", out);
        } else if (*rob) {
            const auto cfg = pipeline_config(robCommon);
            const auto data = replay::load_dataset(robData);
            const auto rows = detect::robustness_sweep(data, cfg, partitionSize);
            write_output(robOut, detect::robustness_csv(rows), out);
        } else if (*rank) {
            const auto cfg = pipeline_config(rankCommon);
            const auto data = replay::load_dataset(rankData);
            const auto samples = features::extract_samples(data, cfg.extraction);
            std::vector<features::StructuredVector> xs;
            for (const auto& s : samples) xs.push_back(s.v28);
            const auto labels = detect::labels_of(samples);
            std::ostringstream csv;
            csv << "rank,feature,u,p,cheaters,honest\n";
            int r = 1;
            for (const auto& f : features::rank_features_mannwhitney(xs, labels))
                csv << r++ << ',' << f.name << ',' << f.u << ',' << f.p << ',' << f.cheaters << ',' << f.honest << '\n';
            write_output(rankOut, csv.str(), out);
        } else if (*ban) {
            const auto labels = load_labels(banLabels);
            std::vector<eval::Detection> detections;
            for (const auto& report : read_jsonl(banPred))
                for (const auto& p : report.at("players"))
                    if (p.at("hawk").get<int>() == 1)
                        detections.push_back({report.at("matchId").get<std::string>(), p.at("steamId").get<std::string>(),
                                              report.at("dateUtc").get<std::string>()});
            const auto rows = eval::ban_cycle_report(detections, labels);
            write_output(banOut, banJson ? eval::ban_cycle_json(rows).dump(2) + "\n" : eval::ban_cycle_csv(rows), out);
        } else if (*serve) {
            if (!serveData.empty()) serveCfg.dataDir = serveData;
            if (!serveModel.empty()) serveCfg.modelDir = serveModel;
            if (!serveBind.empty()) serveCfg.bind = serveBind;
            service::HawkService svc(serveCfg);
            if (!svc.bundle()) err << "hawk: no model bundle loaded; detection endpoints answer 503\n";
            httplib::Server server;
            gServer = &server;
            std::signal(SIGINT, [](int) {
                if (auto* s = gServer.load()) s->stop();
            });
            std::signal(SIGTERM, [](int) {
                if (auto* s = gServer.load()) s->stop();
            });
            const bool ok = service::run_server(svc, server);
            gServer = nullptr;
            if (!ok) {
                err << "hawk: cannot bind " << serveCfg.bind << "\n";
                return 1;
            }
        }
    } catch (const ValidationError& e) {
        err << "hawk: " << e.code() << ": " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "hawk: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "hawk: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace hawk::cli
