#pragma once

#include "hawk/detect/common.hpp"
#include "hawk/learn/classic.hpp"

namespace hawk::detect {

struct RevStatsConfig {
    std::vector<learn::ClassifierKind> kinds{learn::kAllClassifierKinds.begin(), learn::kAllClassifierKinds.end()};
    learn::ClassicConfig classic;
    int maxSubsets = 15;
    double stdFloor = 1e-9;
    std::uint64_t seed = 1;
};

void to_json(json& j, const RevStatsConfig& c);
void from_json(const json& j, RevStatsConfig& c); // ConfigError on an even or empty kind list

// Per kind: strict majority over its instances; then strict majority over the kinds.
Decision nested_majority(const std::vector<std::vector<int>>& votes);

class Committee {
public:
    RevStatsConfig config;
    learn::Standardizer norm; // fitted on the training split over values + mask columns
    std::vector<std::vector<std::unique_ptr<learn::Classifier>>> instances; // [kind][subset]

    Committee() = default;
    Committee(const Committee& other);
    Committee& operator=(const Committee& other);
    Committee(Committee&&) noexcept = default;
    Committee& operator=(Committee&&) noexcept = default;

    bool trained() const;
    // 28 values followed by 28 missing flags.
    static Vector raw_input(const features::StructuredVector& v);
    // z-scores of the 28 values under the training statistics.
    Vector zscores(const features::StructuredVector& v) const;
    std::vector<std::vector<int>> votes(const features::StructuredVector& v) const;
    Decision decide(const features::StructuredVector& v) const;

    void save(const std::filesystem::path& dir) const;
    static Committee load(const std::filesystem::path& dir);
};

Committee train_revstats(std::span<const features::StructuredVector> x, std::span<const int> y,
                         const RevStatsConfig& cfg);
Committee train_revstats(std::span<const features::PlayerSample> train, const RevStatsConfig& cfg);

} // namespace hawk::detect
