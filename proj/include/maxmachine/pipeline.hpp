#pragma once

#include "maxmachine/config.hpp"
#include "maxmachine/dataset.hpp"
#include "maxmachine/eval.hpp"
#include "maxmachine/hierarchy.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/trace.hpp"

#include <string>

namespace maxmachine {

struct TrainResult {
    HierarchicalModel model;
    PosteriorTrace trace;
};

/// Builds the (two-layer unless cfg.hierarchical is false) model for `data` and runs the chain.
TrainResult train(const TripletDataset& data, const RunConfig& cfg, const HoldoutMask& mask);

struct EvaluationRun {
    HoldoutMask mask;
    TrainResult result;
    TypeFrequencyTable baseline;
    EvalReport report;
};

/// Holdout draw, training, baseline fit, and scoring in one deterministic pass.
EvaluationRun run_evaluation(const TripletDataset& data, const RunConfig& cfg,
                             const ClusterMap* clusters = nullptr);

/// Applies the ingestion options (min attribute frequency, per-type cap).
TripletDataset prepare_dataset(const TripletDataset& data, const RunConfig& cfg);

} // namespace maxmachine
