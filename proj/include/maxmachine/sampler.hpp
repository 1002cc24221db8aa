#pragma once

#include "maxmachine/binmat.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/model.hpp"
#include "maxmachine/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace maxmachine {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct GibbsConfig {
    std::size_t max_sweeps = 1000;
    std::optional<std::size_t> burn_in; ///< nullopt: burn-in ends at convergence
    std::size_t n_samples = 20;
    std::uint64_t seed = 0;
    double convergence_eps = 1e-4;
    std::size_t convergence_window = 10;
    bool parallel = false;
    std::size_t threads = 1;
    std::size_t sample_stride = 1;
    bool update_reliabilities = true;
    bool initialize = true; ///< draw unclamped U, Z entries iid Bernoulli(0.5) before the first sweep
    /// Starting reliability of the non-clamped dimensions when initializing; nullopt keeps
    /// the prior modes. Beta(10,1) has its mode at 1, where every dimension that covers a
    /// zero is effectively forbidden and the chain collapses to the empty solution.
    std::optional<double> init_reliability = 0.5;

    void validate() const;
};

/// Prior log-odds for each z_nl: either one shared value or a dense N×L table.
class ZPriorLogits {
  public:
    ZPriorLogits() = default;
    static ZPriorLogits uniform(double logit_value);
    static ZPriorLogits dense(std::size_t n_objects, std::size_t n_dims, std::vector<double> values);

    double operator()(std::size_t n, std::size_t l) const noexcept {
        return table_.empty() ? value_ : table_[n * n_dims_ + l];
    }
    bool is_dense() const noexcept { return !table_.empty(); }

  private:
    double value_ = 0.0;
    std::size_t n_dims_ = 0;
    std::vector<double> table_;
};

struct SweepOptions {
    bool parallel = false;
    std::size_t threads = 1;
    std::uint64_t stream_seed = 0; ///< parallel substreams are keyed by (stream_seed, sweep_index, row)
    std::size_t sweep_index = 0;
    bool zero_temperature = false; ///< accept a bit iff its log-odds are positive
};

/**
 * Full-conditional log-odds of z_nl given everything else.
 *
 * Only cells where dimension l would beat the best remaining active dimension
 * (reliability m, clamped floor included) contribute:
 *   x = 1: ln(p_l / m),  x = 0: ln((1 - p_l) / (1 - m)).
 * Held-out cells contribute nothing. Throws ContractError if z_nl is clamped.
 */
double conditional_log_odds_z(const FactorLayer& layer, const BinaryMatrix& X,
                              const HoldoutMask& mask, std::size_t n, std::size_t l,
                              double prior_logit);

/// Mirror of conditional_log_odds_z for u_ld; the sum runs over objects with z_nl = 1.
double conditional_log_odds_u(const FactorLayer& layer, const BinaryMatrix& X,
                              const HoldoutMask& mask, std::size_t l, std::size_t d,
                              double prior_logit);

/// Mode of Beta(a + c, b + t - c), or its mean where the mode is undefined; clipped.
double map_reliability(double a, double b, double c, double t) noexcept;

/**
 * Gibbs kernel for one layer.
 *
 * Keeps a reliability-ranked ActiveIndex in sync with the layer, plus a per-cell
 * cache of the winner and runner-up, so each conditional costs O(1) per
 * contributing cell. Win and hit counts per dimension are maintained alongside,
 * which makes the log-likelihood and the MAP update O(L). The referenced data
 * matrix must outlive the sampler; when it changes (upper layers see the lower
 * layer's Z as data) call resync().
 */
class LayerSampler {
  public:
    LayerSampler(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask);

    /// Resamples every unclamped z_nl (row-major), then every unclamped u_ld (row-major).
    void sweep(FactorLayer& layer, Rng& rng, const ZPriorLogits& z_prior,
               const SweepOptions& opts = {});
    /// Simultaneous MAP update from winners under the current reliabilities.
    void update_reliabilities(FactorLayer& layer);
    double log_likelihood() const;

    /// Call after modifying the layer outside of sweep().
    void resync(const FactorLayer& layer);
    /// Call after the referenced data matrix changed.
    void data_changed();

  private:
    struct Counts {
        std::vector<std::int64_t> wins;
        std::vector<std::int64_t> ones;
        void reset(std::size_t size) {
            wins.assign(size, 0);
            ones.assign(size, 0);
        }
        void merge(const Counts& other) {
            for (std::size_t i = 0; i < wins.size(); ++i) {
                wins[i] += other.wins[i];
                ones[i] += other.ones[i];
            }
        }
    };

    void refresh_logs();
    void rebuild_cache();
    void refresh_cell(std::size_t n, std::size_t d, Counts& counts);
    void sweep_z(FactorLayer& layer, Rng& rng, const ZPriorLogits& z_prior, const SweepOptions& opts);
    void sweep_u(FactorLayer& layer, Rng& rng, const SweepOptions& opts);
    double z_log_odds(const FactorLayer& layer, std::size_t n, std::size_t l,
                      double prior_logit) const;
    void u_log_odds_row(std::size_t l, const std::vector<std::size_t>& members, std::size_t begin,
                        std::size_t end, std::vector<double>& out) const;
    std::size_t runner_up(std::size_t cell, std::size_t l) const noexcept {
        return win_[cell] == l ? second_[cell] : win_[cell];
    }

    const BinaryMatrix* X_;
    BinaryMatrix observed_;
    ActiveIndex index_;
    std::size_t n_attributes_ = 0;
    std::vector<std::uint16_t> win_;    // N×D winner per cell
    std::vector<std::uint16_t> second_; // N×D winner once win_ is removed
    Counts counts_;                     // over observed cells
    std::vector<std::size_t> order_seen_;
    std::size_t floor_rank_seen_ = 0;
    std::vector<double> log_p_;
    std::vector<double> log_q_;
    double u_prior_logit_ = 0.0;
};

/// Draws unclamped entries of U and Z iid Bernoulli(0.5) and, when given, sets the
/// reliabilities of the non-clamped dimensions to `reliability`.
void initialize_layer(FactorLayer& layer, Rng& rng, std::optional<double> reliability = std::nullopt);

/// One sequential sweep; convenience wrapper over LayerSampler.
void sweep(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask, Rng& rng,
           const ZPriorLogits& z_prior, const SweepOptions& opts = {});
void sweep(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask, Rng& rng);

/// Sweep that recomputes every conditional from scratch with conditional_log_odds_*.
/// Consumes the generator exactly like the fast sequential sweep.
void sweep_reference(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask,
                     Rng& rng, const ZPriorLogits& z_prior, bool zero_temperature = false);

/// Returns and applies the MAP reliabilities.
std::vector<double> update_reliabilities_map(FactorLayer& layer, const BinaryMatrix& X,
                                             const HoldoutMask& mask);

/// Alternates sweeps and MAP updates, detects convergence and collects samples.
PosteriorTrace run(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask,
                   const GibbsConfig& config);

namespace detail {

/// True when each of the last (window - 1) consecutive relative changes of the
/// history is below eps.
bool has_converged(const std::vector<double>& history, double eps, std::size_t window);

/// Shared burn-in / sampling loop. `step` performs one sweep (with its reliability
/// update) and returns the train log-likelihood; `snapshot` captures the state.
PosteriorTrace drive_chain(const GibbsConfig& config, const std::function<double()>& step,
                           const std::function<PosteriorSample()>& snapshot);

/// Seed for a parallel substream.
std::uint64_t substream_seed(std::uint64_t base, std::uint64_t sweep, std::uint64_t stream,
                             std::uint64_t row) noexcept;

} // namespace detail

} // namespace maxmachine
