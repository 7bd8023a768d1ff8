#include "hawk/replay/dataset.hpp"

#include "hawk/error.hpp"
#include "hawk/replay/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace hawk::replay {

namespace fs = std::filesystem;

SplitIndices split_dataset(std::span<const LabeledMatch> matches, std::array<double, 3> ratios, bool byDate,
                           std::uint64_t seed) {
    for (double r : ratios)
        if (r < 0 || !std::isfinite(r)) throw ConfigError("ratios: must be non-negative");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw ConfigError("ratios: must sum to 1");

    std::vector<std::size_t> order(matches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (byDate) {
        std::vector<std::int64_t> when(matches.size());
        for (std::size_t i = 0; i < matches.size(); ++i) when[i] = parse_utc(matches[i].match.dateUtc);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return when[a] < when[b]; });
    } else {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    const double n = static_cast<double>(matches.size());
    const auto cut1 = static_cast<std::size_t>(std::llround(n * ratios[0]));
    const auto cut2 = std::max(cut1, static_cast<std::size_t>(std::llround(n * (ratios[0] + ratios[1]))));
    SplitIndices s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& dst = i < cut1 ? s.train : i < std::min(cut2, order.size()) ? s.validation : s.test;
        dst.push_back(order[i]);
    }
    return s;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view bytes) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IoError", "cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void save_labeled_match(const fs::path& dir, const LabeledMatch& m) {
    write_file(dir / "matches" / (m.match.matchId + ".json"), serialize_match(m.match));
    write_file(dir / "labels" / (m.match.matchId + ".json"), serialize_labels(m.labels, 2));
}

void save_dataset(const fs::path& dir, std::span<const LabeledMatch> matches) {
    for (const auto& m : matches) save_labeled_match(dir, m);
}

std::vector<LabeledMatch> load_dataset(const fs::path& dir) {
    const fs::path matchDir = dir / "matches";
    if (!fs::is_directory(matchDir)) throw ConfigError(matchDir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(matchDir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<LabeledMatch> out;
    out.reserve(files.size());
    for (const auto& f : files) {
        LabeledMatch lm;
        try {
            lm.match = parse_match_json(read_file(f));
        } catch (const ValidationError& e) {
            throw SchemaError(f.filename().string() + ": " + e.what());
        }
        const fs::path lp = dir / "labels" / f.filename();
        if (fs::exists(lp)) {
            lm.labels = parse_labels_json(read_file(lp));
        } else {
            lm.labels.matchId = lm.match.matchId;
            for (const auto& p : lm.match.players) lm.labels.labels.push_back({p.steamId, false, CheatType::None, {}});
        }
        out.push_back(std::move(lm));
    }
    return out;
}

} // namespace hawk::replay
