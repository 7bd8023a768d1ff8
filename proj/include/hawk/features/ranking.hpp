#pragma once

#include "hawk/features/structured.hpp"

#include <span>
#include <string>
#include <vector>

namespace hawk::features {

struct MannWhitney {
    double u = 0; // U statistic of the first sample
    double p = 1; // two-sided, normal approximation with tie and continuity correction
};

// Throws DegenerateClass if either sample is empty.
MannWhitney mann_whitney(std::span<const double> first, std::span<const double> second);

struct FeatureRank {
    std::string name;
    int index = 0;
    double u = 0; // U of the cheater class
    double p = 1;
    std::size_t cheaters = 0, honest = 0; // non-missing samples used
};

// Most distinguishing features first (ascending p, ties by feature order).
// Missing entries are excluded per feature; a feature with an empty class
// after exclusion is ranked last with p = 1. Throws DegenerateClass when a
// class has no samples at all.
std::vector<FeatureRank> rank_features_mannwhitney(std::span<const StructuredVector> xs, std::span<const int> labels);

} // namespace hawk::features
