#pragma once

#include "hawk/detect/pipeline.hpp"

namespace hawk::testing {

// A compact configuration that trains in a few seconds on a desk-scale corpus.
inline detect::PipelineConfig small_pipeline_config(std::uint64_t seed = 1) {
    detect::PipelineConfig cfg;
    cfg.revpov.encoder.hidden = 8;
    cfg.revpov.encoder.layers = 1;
    cfg.revpov.encoder.outputWidth = 6;
    cfg.revpov.encoder.maxLength = 32;
    cfg.revpov.encoderTrain.epochs = 2;
    cfg.revpov.forest.trees = 15;
    cfg.revstats.classic.forest.trees = 15;
    cfg.revstats.classic.mlpTrain.epochs = 40;
    cfg.exspc.train.epochs = 10;
    cfg.set_seed(seed);
    return cfg;
}

inline replay::DatasetSpec small_dataset_spec(int matches, std::uint64_t seed, double sophistication = 0) {
    replay::DatasetSpec spec;
    spec.matches = matches;
    spec.rounds = 8;
    spec.seed = seed;
    spec.sophistication = sophistication;
    spec.cheaters = {{replay::ProfileKind::Aimbot, 1}, {replay::ProfileKind::Wallhack, 1}};
    spec.alternateKinds = true;
    spec.match.frameStride = 64;
    return spec;
}

inline detect::HawkBundle train_small_bundle(int matches, std::uint64_t seed) {
    const auto data = replay::generate_synthetic_dataset(small_dataset_spec(matches, seed));
    const auto cfg = small_pipeline_config(seed);
    const auto split = detect::split_samples(data, cfg);
    return detect::train_bundle(split.train, split.validation, cfg);
}

} // namespace hawk::testing
