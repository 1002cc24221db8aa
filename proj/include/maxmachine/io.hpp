#pragma once

#include "maxmachine/dataset.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/model.hpp"
#include "maxmachine/trace.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace maxmachine {

/// Trained model as written to disk (versioned JSON).
struct ModelArtifact {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    std::string config_text;
    TripletDataset data; ///< dictionaries, type labels, and the training pairs
    std::size_t n_dims = 0;
    std::size_t n_types = 0; ///< layer-2 dimensions; 0 for a single-layer model
    std::vector<double> mean_u; ///< L×D posterior mean
    std::vector<double> mean_z; ///< N×L
    std::vector<double> mean_v; ///< T×L, empty for a single-layer model
    std::vector<std::vector<double>> reliabilities;      ///< per sample, L+1
    std::vector<std::vector<double>> type_reliabilities; ///< per sample, T+1
    std::optional<std::vector<PosteriorSample>> samples;
    std::vector<DimensionStat> stats;
    bool converged = false;
    std::size_t sweeps = 0;

    friend bool operator==(const ModelArtifact&, const ModelArtifact&) = default;
};

/// Summarises a trace; keeps the full samples when `keep_samples`.
ModelArtifact make_artifact(const PosteriorTrace& trace, const TripletDataset& data,
                            const std::string& config_text, bool keep_samples,
                            const HoldoutMask* mask = nullptr);

void save_model(const ModelArtifact& model, const std::string& path);
std::string serialize_model(const ModelArtifact& model);

/// Throws ParseError on malformed or truncated input and UnsupportedVersionError
/// on a format version this build does not read.
ModelArtifact load_model(const std::string& path);
ModelArtifact deserialize_model(const std::string& text);

/**
 * Trace used for prediction: the retained samples, or, when the artifact has
 * none, a single state built from the posterior means (factors thresholded at
 * 0.5, reliabilities averaged). `used_fallback` reports which.
 */
PosteriorTrace artifact_trace(const ModelArtifact& model, bool* used_fallback = nullptr);

} // namespace maxmachine
