#include "hawk/detect/common.hpp"

#include "hawk/error.hpp"
#include "hawk/replay/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

namespace hawk::detect {

Decision majority(std::span<const int> votes) {
    if (votes.empty()) throw UntrainedModel("no votes to aggregate");
    std::size_t ones = 0;
    for (int v : votes) ones += v == 1;
    return {2 * ones > votes.size() ? 1 : 0, static_cast<double>(ones) / static_cast<double>(votes.size())};
}

std::vector<SubsampleSet> multi_subsample(std::span<const int> labels, std::uint64_t seed, int maxSets) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) throw DegenerateClass("multi-subsampling needs both classes");
    std::mt19937_64 rng(seed);
    if (neg.size() < pos.size()) {
        std::shuffle(pos.begin(), pos.end(), rng);
        pos.resize(neg.size());
        std::vector<std::size_t> members = pos;
        members.insert(members.end(), neg.begin(), neg.end());
        std::sort(members.begin(), members.end());
        return {{1, members}};
    }
    const double ratio = static_cast<double>(neg.size()) / static_cast<double>(pos.size());
    const int k = std::clamp(static_cast<int>(std::lround(ratio)), 1, std::max(1, maxSets));
    std::vector<std::size_t> pool = neg;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t next = 0;
    std::vector<SubsampleSet> sets;
    for (int s = 1; s <= k; ++s) {
        std::set<std::size_t> chosen;
        while (chosen.size() < pos.size()) {
            if (next == pool.size()) {
                std::shuffle(pool.begin(), pool.end(), rng);
                next = 0;
            }
            chosen.insert(pool[next++]);
        }
        SubsampleSet set{s, std::vector<std::size_t>(chosen.begin(), chosen.end())};
        set.members.insert(set.members.end(), pos.begin(), pos.end());
        std::sort(set.members.begin(), set.members.end());
        sets.push_back(std::move(set));
    }
    return sets;
}

std::vector<int> labels_of(std::span<const features::PlayerSample> samples) {
    std::vector<int> y;
    y.reserve(samples.size());
    for (const auto& s : samples) y.push_back(s.label);
    return y;
}

void require_both_classes(std::span<const int> labels, const std::string& what) {
    bool pos = false, neg = false;
    for (int y : labels) (y == 1 ? pos : neg) = true;
    if (!pos || !neg) throw DegenerateClass(what + " needs both honest and cheater samples");
}

std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    replay::write_file(path, j.dump(2) + "\n");
}

json read_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(replay::read_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

} // namespace hawk::detect
