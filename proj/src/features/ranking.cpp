#include "hawk/features/ranking.hpp"

#include "hawk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hawk::features {

MannWhitney mann_whitney(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DegenerateClass("Mann-Whitney needs both samples non-empty");
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, int>> all;
    all.reserve(n);
    for (double x : a) all.emplace_back(x, 0);
    for (double x : b) all.emplace_back(x, 1);
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    double rankSumA = 0, tieTerm = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        const double t = static_cast<double>(j - i);
        tieTerm += t * t * t - t;
        for (std::size_t k = i; k < j; ++k)
            if (all[k].second == 0) rankSumA += avg;
        i = j;
    }
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    const double nn = n1 + n2;
    MannWhitney r;
    r.u = rankSumA - n1 * (n1 + 1) / 2.0;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((nn + 1) - tieTerm / (nn * (nn - 1)));
    if (var <= 0) {
        r.p = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::abs(r.u - mu) - 0.5) / std::sqrt(var);
    r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

std::vector<FeatureRank> rank_features_mannwhitney(std::span<const StructuredVector> xs, std::span<const int> labels) {
    if (xs.size() != labels.size()) throw ConfigError("ranking: vectors and labels differ in length");
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<long>(labels.size()))
        throw DegenerateClass("ranking needs both cheaters and honest players");

    std::vector<FeatureRank> out;
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        std::vector<double> cheat, honest;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i].missing[fi]) continue;
            (labels[i] == 1 ? cheat : honest).push_back(xs[i].values[fi]);
        }
        FeatureRank r{std::string(kFeatureNames[fi]), f, 0, 1, cheat.size(), honest.size()};
        if (!cheat.empty() && !honest.empty()) {
            const MannWhitney mw = mann_whitney(cheat, honest);
            r.u = mw.u;
            r.p = mw.p;
        }
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const FeatureRank& a, const FeatureRank& b) { return a.p < b.p; });
    return out;
}

} // namespace hawk::features
