#pragma once

#include "maxmachine/binmat.hpp"

#include <cstddef>
#include <vector>

namespace maxmachine {

/// Snapshot of one layer: codes U (L×D), assignments Z (N×L), and L+1 reliabilities
/// whose last entry belongs to the clamped dimension.
struct LayerState {
    BinaryMatrix U;
    BinaryMatrix Z;
    std::vector<double> reliabilities;

    friend bool operator==(const LayerState&, const LayerState&) = default;
};

/// One retained posterior draw. layers[0] is the data layer; layers[k+1] models layers[k].Z.
struct PosteriorSample {
    std::vector<LayerState> layers;

    friend bool operator==(const PosteriorSample&, const PosteriorSample&) = default;
};

struct PosteriorTrace {
    std::vector<PosteriorSample> samples;
    std::vector<double> train_ll_history;
    std::size_t sweep_count = 0;
    bool converged = false;
    /// Sweep count at which the burn-in phase ended, or 0 if it never did.
    std::size_t burn_in_sweeps = 0;

    bool empty() const noexcept { return samples.empty(); }
    friend bool operator==(const PosteriorTrace&, const PosteriorTrace&) = default;
};

} // namespace maxmachine
