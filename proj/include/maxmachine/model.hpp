#pragma once

#include "maxmachine/binmat.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/trace.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace maxmachine {

inline constexpr double kReliabilityMin = 1e-6;
inline constexpr double kReliabilityMax = 1.0 - 1e-6;

double logistic(double x) noexcept;
double logit(double p) noexcept;
double clip_reliability(double p) noexcept;

/// Prior hyperparameters of one layer.
struct PriorConfig {
    double q_u = 0.1; ///< iid Bernoulli density of U entries (binomial row cardinality)
    double q_z = 0.5; ///< Bernoulli prior on Z when no layer sits above
    double beta_a = 10.0;
    double beta_b = 1.0;
    double beta_a_clamp = 1.0;
    double beta_b_clamp = 1.0;

    void validate() const;
    friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

/// Single global noise parameter of the Boolean (Or) factorisation variant.
struct BmfConfig {
    double lambda_global = 1.0;
    void validate() const;
};

/**
 * One MaxMachine layer.
 *
 * The model for a cell is p(x_nd = 1) = max over the active set
 * {l < L : z_nl = u_ld = 1} ∪ {L} of reliabilities[l]. Dimension L is the
 * implicit clamped dimension (u_Ld = z_nL = 1 everywhere); it is not stored in
 * U or Z, only its reliability (the noise floor) is.
 *
 * clamp_u / clamp_z mark entries that sweeps must leave untouched.
 */
struct FactorLayer {
    BinaryMatrix U;       // L×D
    BinaryMatrix Z;       // N×L
    BinaryMatrix clamp_u; // L×D
    BinaryMatrix clamp_z; // N×L
    std::vector<double> reliabilities; // L+1, each in (0,1)
    PriorConfig priors;

    /// All-zero factors with reliabilities at their prior modes.
    static FactorLayer zeros(std::size_t n_objects, std::size_t n_attributes, std::size_t n_dims,
                             const PriorConfig& priors = {});

    std::size_t n_objects() const noexcept { return Z.rows(); }
    std::size_t n_attributes() const noexcept { return U.cols(); }
    std::size_t n_dims() const noexcept { return U.rows(); }
    double noise_floor() const noexcept { return reliabilities.back(); }

    LayerState state() const { return {U, Z, reliabilities}; }

    /// Throws ShapeError / ConfigError when the invariants do not hold.
    void validate() const;
};

/// Non-owning (U, Z, reliabilities) triple; both FactorLayer and LayerState convert to it.
struct LayerView {
    const BinaryMatrix& U;
    const BinaryMatrix& Z;
    std::span<const double> reliabilities;

    LayerView(const BinaryMatrix& u, const BinaryMatrix& z, std::span<const double> r)
        : U(u), Z(z), reliabilities(r) {}
    LayerView(const FactorLayer& layer) // NOLINT(google-explicit-constructor)
        : U(layer.U), Z(layer.Z), reliabilities(layer.reliabilities) {}
    LayerView(const LayerState& s) // NOLINT(google-explicit-constructor)
        : U(s.U), Z(s.Z), reliabilities(s.reliabilities) {}

    std::size_t n_dims() const noexcept { return U.rows(); }
};

/// Active dimensions at (n, d), ascending; always ends with the clamped index L.
std::vector<std::size_t> active_set(LayerView layer, std::size_t n, std::size_t d);

/// p(x_nd = 1): maximum reliability over the active set.
double point_prob(LayerView layer, std::size_t n, std::size_t d);
double point_prob(LayerView layer, std::size_t n, std::size_t d, bool x);

/// Active dimension with the largest reliability; ties go to the lowest index, so
/// the clamped dimension wins only when strictly more reliable than every other
/// active dimension or when nothing else is active.
std::size_t winner(LayerView layer, std::size_t n, std::size_t d);

/// p(x_nd = x) under the Boolean factorisation with a single global noise parameter.
double or_point_prob(const BmfConfig& cfg, const BinaryMatrix& Z, const BinaryMatrix& U,
                     std::size_t n, std::size_t d, bool x);

/// Sum of log p(x_nd) over all cells not held out.
double log_likelihood(LayerView layer, const BinaryMatrix& X, const HoldoutMask& mask);

/**
 * Reliability-ranked index over a layer's active sets.
 *
 * Dimensions are ordered by (reliability descending, index ascending) and U, Z
 * are kept as bit-permuted copies in that order, so the winner at a cell is the
 * first common set bit of Z's row n and Uᵀ's row d. Updates via set_z / set_u
 * keep the copies in sync. Rebuild after any change to the reliabilities.
 */
class ActiveIndex {
  public:
    explicit ActiveIndex(LayerView layer);

    void rebuild(LayerView layer);
    /// Re-rank after a reliability change; factor bits are re-permuted.
    void rerank(std::span<const double> reliabilities);

    std::size_t n_dims() const noexcept { return n_dims_; }
    const std::vector<double>& reliabilities() const noexcept { return rel_; }

    std::size_t winner(std::size_t n, std::size_t d) const noexcept {
        const std::size_t r = first_common_bit(z_ranked_.row(n), ut_ranked_.row(d));
        return resolve(r);
    }
    /// Winner of the active set with dimension l removed (never removes the clamped one).
    std::size_t winner_excluding(std::size_t n, std::size_t d, std::size_t l) const noexcept {
        const std::size_t r =
            first_common_bit_except(z_ranked_.row(n), ut_ranked_.row(d), rank_of_[l]);
        return resolve(r);
    }
    double prob(std::size_t n, std::size_t d) const noexcept { return rel_[winner(n, d)]; }
    /// Winner and the winner once it is removed. The second entry is meaningful only
    /// when the first is not the clamped dimension.
    std::pair<std::size_t, std::size_t> top_two(std::size_t n, std::size_t d) const noexcept;

    const std::vector<std::size_t>& order() const noexcept { return order_; }
    /// Number of leading ranks that are not beaten by the clamped dimension.
    std::size_t floor_rank() const noexcept;

    void set_z(std::size_t n, std::size_t l, bool v) noexcept { z_ranked_.assign(n, rank_of_[l], v); }
    void set_u(std::size_t l, std::size_t d, bool v) noexcept { ut_ranked_.assign(d, rank_of_[l], v); }

  private:
    std::size_t resolve(std::size_t rank) const noexcept {
        if (rank == npos) return n_dims_;
        const std::size_t dim = order_[rank];
        return rel_[n_dims_] > rel_[dim] ? n_dims_ : dim;
    }

    std::size_t n_dims_ = 0;
    std::vector<double> rel_;
    std::vector<std::size_t> order_;   // rank -> dimension
    std::vector<std::size_t> rank_of_; // dimension -> rank
    BinaryMatrix z_ranked_;            // N×L, columns in rank order
    BinaryMatrix ut_ranked_;           // D×L, columns in rank order
};

/// Monte Carlo posterior predictive: mean over samples of p(x_nd = 1) for each cell.
/// Throws StateError on an empty trace.
std::vector<double> posterior_predictive(const PosteriorTrace& trace, std::span<const Cell> cells);
/// Row-major N×D predictive over every cell.
std::vector<double> posterior_predictive_all(const PosteriorTrace& trace);

struct DimensionStat {
    double nu = 0.0;          ///< share of observed ones won by this dimension
    double lambda_hat = 0.0;  ///< posterior-averaged reliability
    double cardinality = 0.0; ///< mean number of ones in the U row (D for the clamped one)

    friend bool operator==(const DimensionStat&, const DimensionStat&) = default;
};

/// Per-dimension statistics (L+1 entries, last is the clamped dimension) of the data layer.
/// Held-out cells are excluded when a mask is given. Throws StateError on an empty trace.
std::vector<DimensionStat> dimension_stats(const PosteriorTrace& trace, const BinaryMatrix& X,
                                           const HoldoutMask* mask = nullptr);

} // namespace maxmachine
