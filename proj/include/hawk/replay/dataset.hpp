#pragma once

#include "hawk/replay/synth.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace hawk::replay {

struct SplitIndices {
    std::vector<std::size_t> train, validation, test;
};

// Partitions `matches` into train/validation/test by index. Ratios must be
// non-negative and sum to 1 within 1e-9. With byDate the matches are ordered
// by dateUtc (stable) before cutting, otherwise shuffled with `seed`. Sizes
// are the rounded cumulative cut points, so 10 matches at (0.6,0.2,0.2) give
// 6/2/2.
SplitIndices split_dataset(std::span<const LabeledMatch> matches, std::array<double, 3> ratios, bool byDate,
                           std::uint64_t seed);

// Directory layout: <dir>/matches/<matchId>.json and <dir>/labels/<matchId>.json.
void save_dataset(const std::filesystem::path& dir, std::span<const LabeledMatch> matches);
void save_labeled_match(const std::filesystem::path& dir, const LabeledMatch& m);
// Matches are returned sorted by file name. A match without a labels file
// gets an all-honest LabelSet.
std::vector<LabeledMatch> load_dataset(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view bytes);

} // namespace hawk::replay
