#pragma once

#include "hawk/features/player.hpp"
#include "hawk/learn/checkpoint.hpp"
#include "hawk/learn/nn.hpp"

#include <filesystem>
#include <span>

namespace hawk::detect {

using learn::Matrix;
using learn::Vector;
using nlohmann::json;

struct Decision {
    int decision = 0;
    double score = 0;
};

// Strict majority of binary votes (a tie is 0); score = fraction voting 1.
Decision majority(std::span<const int> votes);

// Balanced training sets for imbalanced labels. K = round(#honest / #cheater)
// clamped to [1, maxSets]; every set holds all cheaters plus fresh honest
// samples, taken without repetition until the honest pool runs out and then
// from a reshuffled pool. With fewer honest than cheater samples a single set
// downsamples both classes to the smaller count.
struct SubsampleSet {
    int index = 0;
    std::vector<std::size_t> members;
};
std::vector<SubsampleSet> multi_subsample(std::span<const int> labels, std::uint64_t seed, int maxSets = 15);

std::vector<int> labels_of(std::span<const features::PlayerSample> samples);
void require_both_classes(std::span<const int> labels, const std::string& what);

std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes);
void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

} // namespace hawk::detect
