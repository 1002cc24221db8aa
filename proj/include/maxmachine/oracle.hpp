#pragma once

#include "maxmachine/binmat.hpp"
#include "maxmachine/dataset.hpp"
#include "maxmachine/hierarchy.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace maxmachine {

/// Parameters of the forward (planted) two-layer generative process.
struct SynthConfig {
    std::size_t n_objects = 200;
    std::size_t n_attributes = 30;
    std::size_t n_dims = 4;
    std::size_t n_types = 4;
    double reliability_lo = 0.9;
    double reliability_hi = 0.98;
    double noise_floor = 0.02;
    double q_u = 0.1;
    double type_dim_density = 0.3;
    /// When nonzero, each type activates a uniform number of distinct dimensions in
    /// [dims_per_type_min, dims_per_type_max] instead of Bernoulli(type_dim_density).
    std::size_t dims_per_type_min = 0;
    std::size_t dims_per_type_max = 0;
    /// Layer-2 reliabilities and floor; default to the layer-1 values.
    std::optional<double> type_reliability_lo;
    std::optional<double> type_reliability_hi;
    std::optional<double> type_noise_floor;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    TripletDataset data;
    BinaryMatrix X; // N×D
    BinaryMatrix U; // L×D
    BinaryMatrix Z; // N×L
    BinaryMatrix V; // T×L
    std::vector<double> reliabilities;      // L+1, last is the floor
    std::vector<double> type_reliabilities; // T+1, last is the layer-2 floor
    std::vector<std::uint32_t> type_of;
};

/// Planted probabilities are clipped to [1e-9, 1 - 1e-9].
inline constexpr double kPlantedMin = 1e-9;
inline constexpr double kPlantedMax = 1.0 - 1e-9;

/// Samples V, round-robin types, Z from the layer-2 MaxMachine, U rows, then X.
SynthResult generate(const SynthConfig& cfg);

/// Planted recovery scenario: N=2000, D=50, L=8, T=10, reliabilities [0.93, 0.98], floor 0.02.
SynthConfig scenario_s1(std::uint64_t seed = 1);
/// Heteroscedastic scenario where each type mixes 2–3 dimensions that objects carry independently.
SynthConfig scenario_s2(std::uint64_t seed = 2);
/// Throughput scenario: N=50,000, D=200, L=30.
SynthConfig scenario_throughput(std::uint64_t seed = 3);

struct ExactPosterior {
    std::vector<double> u_marginal; ///< L×D, p(u_ld = 1 | X)
    std::vector<double> z_marginal; ///< N×L
    std::vector<double> predictive; ///< N×D, p(x_nd = 1 | X)
    double log_evidence = 0.0;      ///< log of the total unnormalised weight
    std::size_t n_states = 0;
};

/// Maximum number of free binary variables an exact enumeration accepts.
inline constexpr std::size_t kMaxOracleVariables = 16;

/**
 * Exact posterior over every unclamped entry of U and Z by enumeration, with
 * the layer's reliabilities held fixed. Clamped entries keep their current
 * values. Priors: u ~ Bernoulli(q_u), z ~ Bernoulli(q_z).
 * Throws SizeError when more than kMaxOracleVariables entries are free.
 */
ExactPosterior exact_posterior(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask);

struct OracleTarget {
    std::size_t layer = 0;
    FactorKind matrix = FactorKind::Z;
    std::size_t row = 0;
    std::size_t col = 0;
};

/// p(bit = 1 | all other variables) = w1 / (w0 + w1) from the full single-layer joint.
double exact_conditional(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask,
                         const OracleTarget& target);

/// Same, from the full two-layer joint (data likelihood, layer-2 likelihood of Z, priors on U and V).
double exact_conditional(const HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask,
                         const OracleTarget& target);

} // namespace maxmachine
