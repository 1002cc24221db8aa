#include "maxmachine/sampler.hpp"

#include "maxmachine/errors.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <string>

#ifdef MAXMACHINE_HAVE_OPENMP
#include <omp.h>
#endif

namespace maxmachine {

void GibbsConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
    if (convergence_window < 2) throw ConfigError("convergence_window must be at least 2");
    if (sample_stride < 1) throw ConfigError("sample_stride must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (!(convergence_eps >= 0)) throw ConfigError("convergence_eps must be nonnegative");
    if (init_reliability && !(*init_reliability > 0.0 && *init_reliability < 1.0)) {
        throw ConfigError("init_reliability must lie in (0, 1)");
    }
}

ZPriorLogits ZPriorLogits::uniform(double logit_value) {
    ZPriorLogits p;
    p.value_ = logit_value;
    return p;
}

ZPriorLogits ZPriorLogits::dense(std::size_t n_objects, std::size_t n_dims, std::vector<double> values) {
    if (values.size() != n_objects * n_dims) throw ShapeError("ZPriorLogits: expected N×L values");
    ZPriorLogits p;
    p.n_dims_ = n_dims;
    p.table_ = std::move(values);
    return p;
}

double map_reliability(double a, double b, double c, double t) noexcept {
    const double alpha = a + c;
    const double total = a + b + t;
    double r;
    if (alpha < 1.0 || total <= 2.0) {
        r = alpha / total;
    } else {
        r = (alpha - 1.0) / (total - 2.0);
    }
    return clip_reliability(r);
}

namespace {

// Log-likelihood gain of a cell when dimension `l` (reliability p_l) displaces the
// current best m. Zero when l cannot win.
inline double gain(bool x, double log_p_l, double log_p_m, double log_q_l, double log_q_m) noexcept {
    return x ? log_p_l - log_p_m : log_q_l - log_q_m;
}

// Best active dimension excluding `skip`, by recomputation. Same tie rule as winner().
std::size_t naive_winner_excluding(const FactorLayer& layer, std::size_t n, std::size_t d,
                                   std::size_t skip) {
    const std::size_t L = layer.n_dims();
    std::size_t best = L;
    double best_p = -1.0;
    for (std::size_t k = 0; k < L; ++k) {
        if (k == skip) continue;
        if (layer.Z.test(n, k) && layer.U.test(k, d) && layer.reliabilities[k] > best_p) {
            best = k;
            best_p = layer.reliabilities[k];
        }
    }
    if (layer.reliabilities[L] > best_p) best = L;
    return best;
}

bool is_held(const HoldoutMask& mask, std::size_t n, std::size_t d) {
    return !mask.empty() && mask.contains(n, d);
}

void check_data(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask) {
    if (X.rows() != layer.n_objects() || X.cols() != layer.n_attributes()) {
        throw ShapeError("data is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                         " but the layer expects " + std::to_string(layer.n_objects()) + "x" +
                         std::to_string(layer.n_attributes()));
    }
    if (!mask.empty() && (mask.n_objects() != X.rows() || mask.n_attributes() != X.cols())) {
        throw ShapeError("holdout mask shape does not match the data");
    }
}

inline bool draw(double log_odds, Rng& rng, bool zero_temperature) {
    const double u = uniform01(rng);
    return zero_temperature ? log_odds > 0.0 : u < logistic(log_odds);
}

} // namespace

double conditional_log_odds_z(const FactorLayer& layer, const BinaryMatrix& X,
                              const HoldoutMask& mask, std::size_t n, std::size_t l,
                              double prior_logit) {
    check_data(layer, X, mask);
    if (n >= layer.n_objects() || l >= layer.n_dims()) throw BoundsError("z index out of range");
    if (layer.clamp_z.test(n, l)) throw ContractError("z entry is clamped");
    const auto& rel = layer.reliabilities;
    const double log_p_l = std::log(rel[l]);
    const double log_q_l = std::log1p(-rel[l]);
    double total = prior_logit;
    layer.U.for_each_in_row(l, [&](std::size_t d) {
        if (is_held(mask, n, d)) return;
        const std::size_t m = naive_winner_excluding(layer, n, d, l);
        if (rel[l] > rel[m]) {
            total += gain(X.test(n, d), log_p_l, std::log(rel[m]), log_q_l, std::log1p(-rel[m]));
        }
    });
    return total;
}

double conditional_log_odds_u(const FactorLayer& layer, const BinaryMatrix& X,
                              const HoldoutMask& mask, std::size_t l, std::size_t d,
                              double prior_logit) {
    check_data(layer, X, mask);
    if (l >= layer.n_dims() || d >= layer.n_attributes()) throw BoundsError("u index out of range");
    if (layer.clamp_u.test(l, d)) throw ContractError("u entry is clamped");
    const auto& rel = layer.reliabilities;
    const double log_p_l = std::log(rel[l]);
    const double log_q_l = std::log1p(-rel[l]);
    double total = prior_logit;
    for (std::size_t n = 0; n < layer.n_objects(); ++n) {
        if (!layer.Z.test(n, l) || is_held(mask, n, d)) continue;
        const std::size_t m = naive_winner_excluding(layer, n, d, l);
        if (rel[l] > rel[m]) {
            total += gain(X.test(n, d), log_p_l, std::log(rel[m]), log_q_l, std::log1p(-rel[m]));
        }
    }
    return total;
}

LayerSampler::LayerSampler(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask)
    : X_(&X), observed_(mask.empty() ? BinaryMatrix(X.rows(), X.cols(), true) : mask.observed()),
      index_(layer), n_attributes_(X.cols()) {
    layer.validate();
    check_data(layer, X, mask);
    if (layer.n_dims() >= std::numeric_limits<std::uint16_t>::max()) {
        throw SizeError("at most 65534 latent dimensions are supported");
    }
    refresh_logs();
    u_prior_logit_ = logit(layer.priors.q_u);
    rebuild_cache();
}

void LayerSampler::resync(const FactorLayer& layer) {
    index_.rebuild(layer);
    refresh_logs();
    u_prior_logit_ = logit(layer.priors.q_u);
    rebuild_cache();
}

void LayerSampler::data_changed() {
    counts_.reset(index_.n_dims() + 1);
    for (std::size_t n = 0; n < observed_.rows(); ++n) {
        observed_.for_each_in_row(n, [&](std::size_t d) {
            const std::size_t w = win_[n * n_attributes_ + d];
            ++counts_.wins[w];
            if (X_->test(n, d)) ++counts_.ones[w];
        });
    }
}

void LayerSampler::refresh_logs() {
    const auto& rel = index_.reliabilities();
    log_p_.resize(rel.size());
    log_q_.resize(rel.size());
    for (std::size_t l = 0; l < rel.size(); ++l) {
        log_p_[l] = std::log(rel[l]);
        log_q_[l] = std::log1p(-rel[l]);
    }
}

void LayerSampler::rebuild_cache() {
    const std::size_t N = observed_.rows();
    const std::size_t D = n_attributes_;
    win_.resize(N * D);
    second_.resize(N * D);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t d = 0; d < D; ++d) {
            const auto [w, s] = index_.top_two(n, d);
            win_[n * D + d] = static_cast<std::uint16_t>(w);
            second_[n * D + d] = static_cast<std::uint16_t>(s);
        }
    }
    order_seen_ = index_.order();
    floor_rank_seen_ = index_.floor_rank();
    data_changed();
}

void LayerSampler::refresh_cell(std::size_t n, std::size_t d, Counts& counts) {
    const std::size_t cell = n * n_attributes_ + d;
    const bool observed = observed_.test(n, d);
    const bool x = observed && X_->test(n, d);
    if (observed) {
        --counts.wins[win_[cell]];
        if (x) --counts.ones[win_[cell]];
    }
    const auto [w, s] = index_.top_two(n, d);
    win_[cell] = static_cast<std::uint16_t>(w);
    second_[cell] = static_cast<std::uint16_t>(s);
    if (observed) {
        ++counts.wins[w];
        if (x) ++counts.ones[w];
    }
}

double LayerSampler::z_log_odds(const FactorLayer& layer, std::size_t n, std::size_t l,
                                double prior_logit) const {
    const auto& rel = index_.reliabilities();
    const double p_l = rel[l];
    double total = prior_logit;
    const auto obs_row = observed_.row(n);
    const auto u_row = layer.U.row(l);
    const std::size_t base = n * n_attributes_;
    for (std::size_t w = 0; w < u_row.size(); ++w) {
        auto word = u_row[w] & obs_row[w];
        while (word != 0) {
            const std::size_t d = w * BinaryMatrix::word_bits + std::countr_zero(word);
            word &= word - 1;
            const std::size_t m = runner_up(base + d, l);
            if (p_l > rel[m]) total += gain(X_->test(n, d), log_p_[l], log_p_[m], log_q_[l], log_q_[m]);
        }
    }
    return total;
}

// Log-odds of u_ld for d in [begin, end). Entries of one U row are conditionally
// independent given Z, so a single pass over the members serves every column;
// each column still sums its members in ascending order.
void LayerSampler::u_log_odds_row(std::size_t l, const std::vector<std::size_t>& members,
                                  std::size_t begin, std::size_t end, std::vector<double>& out) const {
    const auto& rel = index_.reliabilities();
    const double p_l = rel[l];
    // gains[2m + x]: the cell's contribution when m is the best rival and x the datum.
    std::vector<double> gains(2 * rel.size(), 0.0);
    std::vector<std::uint8_t> counts(rel.size(), 0);
    for (std::size_t m = 0; m < rel.size(); ++m) {
        if (!(p_l > rel[m])) continue;
        counts[m] = 1;
        gains[2 * m] = gain(false, log_p_[l], log_p_[m], log_q_[l], log_q_[m]);
        gains[2 * m + 1] = gain(true, log_p_[l], log_p_[m], log_q_[l], log_q_[m]);
    }
    for (std::size_t d = begin; d < end; ++d) out[d] = u_prior_logit_;
    for (std::size_t n : members) {
        const std::size_t base = n * n_attributes_;
        const auto x_row = X_->row(n);
        const auto obs_row = observed_.row(n);
        for (std::size_t d = begin; d < end; ++d) {
            const std::size_t w = d / BinaryMatrix::word_bits;
            const unsigned bit = d % BinaryMatrix::word_bits;
            if (((obs_row[w] >> bit) & 1U) == 0) continue;
            const std::size_t m = runner_up(base + d, l);
            if (counts[m] == 0) continue;
            out[d] += gains[2 * m + ((x_row[w] >> bit) & 1U)];
        }
    }
}

void LayerSampler::sweep(FactorLayer& layer, Rng& rng, const ZPriorLogits& z_prior,
                         const SweepOptions& opts) {
    sweep_z(layer, rng, z_prior, opts);
    sweep_u(layer, rng, opts);
}

namespace {

std::size_t team_size(const SweepOptions& opts) {
#ifdef MAXMACHINE_HAVE_OPENMP
    return opts.parallel ? opts.threads : 1;
#else
    (void)opts;
    return 1;
#endif
}

std::size_t team_member() {
#ifdef MAXMACHINE_HAVE_OPENMP
    return static_cast<std::size_t>(omp_get_thread_num());
#else
    return 0;
#endif
}

} // namespace

void LayerSampler::sweep_z(FactorLayer& layer, Rng& rng, const ZPriorLogits& z_prior,
                           const SweepOptions& opts) {
    const std::size_t N = layer.n_objects();
    const std::size_t L = layer.n_dims();
    auto update_row = [&](std::size_t n, Rng& g, Counts& counts) {
        for (std::size_t l = 0; l < L; ++l) {
            if (layer.clamp_z.test(n, l)) continue;
            const double lo = z_log_odds(layer, n, l, z_prior(n, l));
            const bool v = draw(lo, g, opts.zero_temperature);
            if (v != layer.Z.test(n, l)) {
                layer.Z.assign(n, l, v);
                index_.set_z(n, l, v);
                layer.U.for_each_in_row(l, [&](std::size_t d) { refresh_cell(n, d, counts); });
            }
        }
    };
    if (!opts.parallel) {
        for (std::size_t n = 0; n < N; ++n) update_row(n, rng, counts_);
        return;
    }
    std::vector<Counts> partial(team_size(opts));
    for (auto& c : partial) c.reset(L + 1);
    const auto rows = static_cast<std::ptrdiff_t>(N);
#ifdef MAXMACHINE_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(static_cast<int>(opts.threads))
#endif
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const auto n = static_cast<std::size_t>(i);
        Rng g(detail::substream_seed(opts.stream_seed, opts.sweep_index, 0, n));
        update_row(n, g, partial[team_member()]);
    }
    for (const auto& c : partial) counts_.merge(c);
}

void LayerSampler::sweep_u(FactorLayer& layer, Rng& rng, const SweepOptions& opts) {
    const std::size_t N = layer.n_objects();
    const std::size_t L = layer.n_dims();
    const std::size_t D = layer.n_attributes();
    std::vector<std::size_t> members;
    members.reserve(N);
    std::vector<double> log_odds(D);
    std::vector<Counts> partial(team_size(opts));
    for (auto& c : partial) c.reset(L + 1);
    for (std::size_t l = 0; l < L; ++l) {
        members.clear();
        for (std::size_t n = 0; n < N; ++n) {
            if (layer.Z.test(n, l)) members.push_back(n);
        }
        auto update_block = [&](std::size_t begin, std::size_t end, Rng& g, Counts& counts) {
            u_log_odds_row(l, members, begin, end, log_odds);
            for (std::size_t d = begin; d < end; ++d) {
                if (layer.clamp_u.test(l, d)) continue;
                const bool v = draw(log_odds[d], g, opts.zero_temperature);
                if (v != layer.U.test(l, d)) {
                    layer.U.assign(l, d, v);
                    index_.set_u(l, d, v);
                    for (std::size_t n : members) refresh_cell(n, d, counts);
                }
            }
        };
        if (!opts.parallel) {
            update_block(0, D, rng, counts_);
            continue;
        }
        // Blocks of 64 columns never share a storage word of U's row l.
        const auto blocks = static_cast<std::ptrdiff_t>(layer.U.words_per_row());
#ifdef MAXMACHINE_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(static_cast<int>(opts.threads))
#endif
        for (std::ptrdiff_t b = 0; b < blocks; ++b) {
            Rng g(detail::substream_seed(opts.stream_seed, opts.sweep_index, 1 + l,
                                         static_cast<std::uint64_t>(b)));
            const std::size_t begin = static_cast<std::size_t>(b) * BinaryMatrix::word_bits;
            update_block(begin, std::min(D, begin + BinaryMatrix::word_bits), g, partial[team_member()]);
        }
    }
    for (const auto& c : partial) counts_.merge(c);
}

void LayerSampler::update_reliabilities(FactorLayer& layer) {
    const std::size_t L = layer.n_dims();
    const PriorConfig& pr = layer.priors;
    for (std::size_t l = 0; l <= L; ++l) {
        const double a = l < L ? pr.beta_a : pr.beta_a_clamp;
        const double b = l < L ? pr.beta_b : pr.beta_b_clamp;
        layer.reliabilities[l] = map_reliability(a, b, static_cast<double>(counts_.ones[l]),
                                                 static_cast<double>(counts_.wins[l]));
    }
    index_.rerank(layer.reliabilities);
    refresh_logs();
    // Cached winners are dimension indices; they stay valid while the ranking does.
    if (index_.order() != order_seen_ || index_.floor_rank() != floor_rank_seen_) rebuild_cache();
}

double LayerSampler::log_likelihood() const {
    double total = 0.0;
    for (std::size_t l = 0; l < counts_.wins.size(); ++l) {
        const auto ones = static_cast<double>(counts_.ones[l]);
        const auto zeros = static_cast<double>(counts_.wins[l] - counts_.ones[l]);
        if (ones > 0) total += ones * log_p_[l];
        if (zeros > 0) total += zeros * log_q_[l];
    }
    return total;
}

void initialize_layer(FactorLayer& layer, Rng& rng, std::optional<double> reliability) {
    for (std::size_t n = 0; n < layer.n_objects(); ++n) {
        for (std::size_t l = 0; l < layer.n_dims(); ++l) {
            if (!layer.clamp_z.test(n, l)) layer.Z.assign(n, l, uniform01(rng) < 0.5);
        }
    }
    for (std::size_t l = 0; l < layer.n_dims(); ++l) {
        for (std::size_t d = 0; d < layer.n_attributes(); ++d) {
            if (!layer.clamp_u.test(l, d)) layer.U.assign(l, d, uniform01(rng) < 0.5);
        }
    }
    if (reliability) std::fill(layer.reliabilities.begin(), layer.reliabilities.end() - 1, *reliability);
}

void sweep(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask, Rng& rng,
           const ZPriorLogits& z_prior, const SweepOptions& opts) {
    LayerSampler sampler(layer, X, mask);
    sampler.sweep(layer, rng, z_prior, opts);
}

void sweep(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask, Rng& rng) {
    sweep(layer, X, mask, rng, ZPriorLogits::uniform(logit(layer.priors.q_z)));
}

void sweep_reference(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask,
                     Rng& rng, const ZPriorLogits& z_prior, bool zero_temperature) {
    layer.validate();
    for (std::size_t n = 0; n < layer.n_objects(); ++n) {
        for (std::size_t l = 0; l < layer.n_dims(); ++l) {
            if (layer.clamp_z.test(n, l)) continue;
            const double lo = conditional_log_odds_z(layer, X, mask, n, l, z_prior(n, l));
            layer.Z.assign(n, l, draw(lo, rng, zero_temperature));
        }
    }
    const double u_prior = logit(layer.priors.q_u);
    for (std::size_t l = 0; l < layer.n_dims(); ++l) {
        for (std::size_t d = 0; d < layer.n_attributes(); ++d) {
            if (layer.clamp_u.test(l, d)) continue;
            const double lo = conditional_log_odds_u(layer, X, mask, l, d, u_prior);
            layer.U.assign(l, d, draw(lo, rng, zero_temperature));
        }
    }
}

std::vector<double> update_reliabilities_map(FactorLayer& layer, const BinaryMatrix& X,
                                             const HoldoutMask& mask) {
    LayerSampler sampler(layer, X, mask);
    sampler.update_reliabilities(layer);
    return layer.reliabilities;
}

PosteriorTrace run(FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask,
                   const GibbsConfig& config) {
    config.validate();
    layer.validate();
    check_data(layer, X, mask);
    Rng rng(config.seed);
    if (config.initialize) initialize_layer(layer, rng, config.init_reliability);
    LayerSampler sampler(layer, X, mask);
    const ZPriorLogits z_prior = ZPriorLogits::uniform(logit(layer.priors.q_z));
    std::size_t sweep_index = 0;
    SweepOptions opts;
    opts.parallel = config.parallel;
    opts.threads = config.threads;
    opts.stream_seed = config.seed;
    auto step = [&]() {
        opts.sweep_index = sweep_index++;
        sampler.sweep(layer, rng, z_prior, opts);
        if (config.update_reliabilities) sampler.update_reliabilities(layer);
        return sampler.log_likelihood();
    };
    auto snapshot = [&]() { return PosteriorSample{{layer.state()}}; };
    return detail::drive_chain(config, step, snapshot);
}

namespace detail {

bool has_converged(const std::vector<double>& history, double eps, std::size_t window) {
    if (window < 2 || history.size() < window) return false;
    for (std::size_t i = history.size() - window + 1; i < history.size(); ++i) {
        const double change = std::abs(history[i] - history[i - 1]);
        if (change == 0.0) continue;
        const double scale = std::abs(history[i - 1]);
        if (!(change < eps * scale)) return false;
    }
    return true;
}

PosteriorTrace drive_chain(const GibbsConfig& config, const std::function<double()>& step,
                           const std::function<PosteriorSample()>& snapshot) {
    PosteriorTrace trace;
    bool burning = true;
    std::size_t burn_end = 0;
    while (trace.sweep_count < config.max_sweeps) {
        trace.train_ll_history.push_back(step());
        ++trace.sweep_count;
        if (!trace.converged &&
            has_converged(trace.train_ll_history, config.convergence_eps, config.convergence_window)) {
            trace.converged = true;
        }
        if (burning) {
            const bool done = config.burn_in ? trace.sweep_count >= *config.burn_in : trace.converged;
            if (done) {
                burning = false;
                burn_end = trace.sweep_count;
                trace.burn_in_sweeps = burn_end;
            }
            continue;
        }
        if ((trace.sweep_count - burn_end) % config.sample_stride == 0) {
            trace.samples.push_back(snapshot());
            if (trace.samples.size() >= config.n_samples) break;
        }
    }
    // A chain that never left burn-in still reports its final state.
    if (trace.samples.empty() && trace.sweep_count > 0) trace.samples.push_back(snapshot());
    return trace;
}

std::uint64_t substream_seed(std::uint64_t base, std::uint64_t sweep, std::uint64_t stream,
                             std::uint64_t row) noexcept {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(base);
    h = mix(h ^ sweep);
    h = mix(h ^ stream);
    return mix(h ^ row);
}

} // namespace detail

} // namespace maxmachine
