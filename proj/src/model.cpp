#include "maxmachine/model.hpp"

#include "maxmachine/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace maxmachine {

double logistic(double x) noexcept {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

double clip_reliability(double p) noexcept { return std::clamp(p, kReliabilityMin, kReliabilityMax); }

namespace {

bool is_open_probability(double p) { return p > 0.0 && p < 1.0; }

void check_cell(LayerView layer, std::size_t n, std::size_t d) {
    if (n >= layer.Z.rows() || d >= layer.U.cols()) {
        throw BoundsError("cell (" + std::to_string(n) + ", " + std::to_string(d) + ") out of range");
    }
}

} // namespace

void PriorConfig::validate() const {
    if (!is_open_probability(q_u)) throw ConfigError("q_u must lie in (0,1)");
    if (!is_open_probability(q_z)) throw ConfigError("q_z must lie in (0,1)");
    if (!(beta_a > 0 && beta_b > 0 && beta_a_clamp > 0 && beta_b_clamp > 0)) {
        throw ConfigError("beta prior parameters must be positive");
    }
}

void BmfConfig::validate() const {
    if (!(lambda_global >= 0)) throw ConfigError("lambda_global must be nonnegative");
}

namespace {

// Mode of Beta(a, b); the mean where the mode is not unique.
double prior_mode(double a, double b) {
    if ((a > 1.0 && b >= 1.0) || (a >= 1.0 && b > 1.0)) return clip_reliability((a - 1.0) / (a + b - 2.0));
    return clip_reliability(a / (a + b));
}

} // namespace

FactorLayer FactorLayer::zeros(std::size_t n_objects, std::size_t n_attributes, std::size_t n_dims,
                               const PriorConfig& priors) {
    priors.validate();
    FactorLayer layer;
    layer.U = BinaryMatrix(n_dims, n_attributes);
    layer.Z = BinaryMatrix(n_objects, n_dims);
    layer.clamp_u = BinaryMatrix(n_dims, n_attributes);
    layer.clamp_z = BinaryMatrix(n_objects, n_dims);
    layer.priors = priors;
    layer.reliabilities.assign(n_dims + 1, prior_mode(priors.beta_a, priors.beta_b));
    layer.reliabilities.back() = prior_mode(priors.beta_a_clamp, priors.beta_b_clamp);
    return layer;
}

void FactorLayer::validate() const {
    priors.validate();
    const std::size_t L = U.rows();
    if (Z.cols() != L) throw ShapeError("Z has " + std::to_string(Z.cols()) + " columns, U has " +
                                        std::to_string(L) + " rows");
    if (clamp_u.rows() != U.rows() || clamp_u.cols() != U.cols()) throw ShapeError("clamp_u shape differs from U");
    if (clamp_z.rows() != Z.rows() || clamp_z.cols() != Z.cols()) throw ShapeError("clamp_z shape differs from Z");
    if (reliabilities.size() != L + 1) throw ShapeError("expected L+1 reliabilities");
    for (double r : reliabilities) {
        if (!is_open_probability(r)) throw ConfigError("reliabilities must lie in (0,1)");
    }
}

std::vector<std::size_t> active_set(LayerView layer, std::size_t n, std::size_t d) {
    check_cell(layer, n, d);
    std::vector<std::size_t> out;
    const std::size_t L = layer.n_dims();
    for (std::size_t l = 0; l < L; ++l) {
        if (layer.Z.test(n, l) && layer.U.test(l, d)) out.push_back(l);
    }
    out.push_back(L);
    return out;
}

std::size_t winner(LayerView layer, std::size_t n, std::size_t d) {
    check_cell(layer, n, d);
    const std::size_t L = layer.n_dims();
    std::size_t best = L;
    double best_p = -1.0;
    for (std::size_t l = 0; l < L; ++l) {
        if (layer.Z.test(n, l) && layer.U.test(l, d) && layer.reliabilities[l] > best_p) {
            best = l;
            best_p = layer.reliabilities[l];
        }
    }
    if (layer.reliabilities[L] > best_p) best = L;
    return best;
}

double point_prob(LayerView layer, std::size_t n, std::size_t d) {
    return layer.reliabilities[winner(layer, n, d)];
}

double point_prob(LayerView layer, std::size_t n, std::size_t d, bool x) {
    const double p = point_prob(layer, n, d);
    return x ? p : 1.0 - p;
}

double or_point_prob(const BmfConfig& cfg, const BinaryMatrix& Z, const BinaryMatrix& U,
                     std::size_t n, std::size_t d, bool x) {
    if (Z.cols() != U.rows()) throw ShapeError("or_point_prob: inner dimensions differ");
    if (n >= Z.rows() || d >= U.cols()) throw BoundsError("or_point_prob: cell out of range");
    bool covered = false;
    for (std::size_t l = 0; l < Z.cols() && !covered; ++l) covered = Z.test(n, l) && U.test(l, d);
    const double sign = (x ? 1.0 : -1.0) * (covered ? 1.0 : -1.0);
    return logistic(cfg.lambda_global * sign);
}

double log_likelihood(LayerView layer, const BinaryMatrix& X, const HoldoutMask& mask) {
    if (X.rows() != layer.Z.rows() || X.cols() != layer.U.cols()) {
        throw ShapeError("log_likelihood: data shape does not match the layer");
    }
    if (!mask.empty() && (mask.n_objects() != X.rows() || mask.n_attributes() != X.cols())) {
        throw ShapeError("log_likelihood: mask shape does not match the data");
    }
    const ActiveIndex index(layer);
    const auto& rel = index.reliabilities();
    std::vector<double> log_p(rel.size());
    std::vector<double> log_q(rel.size());
    for (std::size_t l = 0; l < rel.size(); ++l) {
        log_p[l] = std::log(rel[l]);
        log_q[l] = std::log1p(-rel[l]);
    }
    const bool masked = !mask.empty();
    double total = 0.0;
    for (std::size_t n = 0; n < X.rows(); ++n) {
        for (std::size_t d = 0; d < X.cols(); ++d) {
            if (masked && mask.contains(n, d)) continue;
            const std::size_t w = index.winner(n, d);
            total += X.test(n, d) ? log_p[w] : log_q[w];
        }
    }
    return total;
}

ActiveIndex::ActiveIndex(LayerView layer) { rebuild(layer); }

void ActiveIndex::rebuild(LayerView layer) {
    n_dims_ = layer.n_dims();
    if (layer.reliabilities.size() != n_dims_ + 1) throw ShapeError("expected L+1 reliabilities");
    if (layer.Z.cols() != n_dims_) throw ShapeError("Z columns differ from U rows");
    rel_.assign(layer.reliabilities.begin(), layer.reliabilities.end());
    order_.resize(n_dims_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return rel_[a] > rel_[b]; });
    rank_of_.resize(n_dims_);
    for (std::size_t r = 0; r < n_dims_; ++r) rank_of_[order_[r]] = r;

    z_ranked_ = BinaryMatrix(layer.Z.rows(), n_dims_);
    for (std::size_t n = 0; n < layer.Z.rows(); ++n) {
        layer.Z.for_each_in_row(n, [&](std::size_t l) { z_ranked_.assign(n, rank_of_[l], true); });
    }
    ut_ranked_ = BinaryMatrix(layer.U.cols(), n_dims_);
    for (std::size_t l = 0; l < n_dims_; ++l) {
        layer.U.for_each_in_row(l, [&](std::size_t d) { ut_ranked_.assign(d, rank_of_[l], true); });
    }
}

std::pair<std::size_t, std::size_t> ActiveIndex::top_two(std::size_t n, std::size_t d) const noexcept {
    const auto a = z_ranked_.row(n);
    const auto b = ut_ranked_.row(d);
    std::size_t first = npos;
    for (std::size_t w = 0; w < a.size(); ++w) {
        auto both = a[w] & b[w];
        while (both != 0) {
            const std::size_t r = w * BinaryMatrix::word_bits + std::countr_zero(both);
            if (first != npos) return {resolve(first), resolve(r)};
            first = r;
            both &= both - 1;
        }
    }
    return {resolve(first), n_dims_};
}

std::size_t ActiveIndex::floor_rank() const noexcept {
    std::size_t k = 0;
    while (k < n_dims_ && !(rel_[n_dims_] > rel_[order_[k]])) ++k;
    return k;
}

void ActiveIndex::rerank(std::span<const double> reliabilities) {
    if (reliabilities.size() != n_dims_ + 1) throw ShapeError("expected L+1 reliabilities");
    // Recover unranked factors, then rebuild under the new order.
    BinaryMatrix Z(z_ranked_.rows(), n_dims_);
    for (std::size_t n = 0; n < z_ranked_.rows(); ++n) {
        z_ranked_.for_each_in_row(n, [&](std::size_t r) { Z.assign(n, order_[r], true); });
    }
    BinaryMatrix U(n_dims_, ut_ranked_.rows());
    for (std::size_t d = 0; d < ut_ranked_.rows(); ++d) {
        ut_ranked_.for_each_in_row(d, [&](std::size_t r) { U.assign(order_[r], d, true); });
    }
    const std::vector<double> rel(reliabilities.begin(), reliabilities.end());
    rebuild(LayerView(U, Z, rel));
}

namespace {

const LayerState& data_layer(const PosteriorSample& s) {
    if (s.layers.empty()) throw StateError("posterior sample has no layers");
    return s.layers.front();
}

} // namespace

std::vector<double> posterior_predictive(const PosteriorTrace& trace, std::span<const Cell> cells) {
    if (trace.empty()) throw StateError("posterior_predictive: trace holds no samples");
    std::vector<double> out(cells.size(), 0.0);
    for (const auto& sample : trace.samples) {
        const LayerState& layer = data_layer(sample);
        const ActiveIndex index(layer);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const Cell c = cells[i];
            if (c.n >= layer.Z.rows() || c.d >= layer.U.cols()) {
                throw BoundsError("posterior_predictive: cell out of range");
            }
            out[i] += index.prob(c.n, c.d);
        }
    }
    const double s = static_cast<double>(trace.samples.size());
    for (double& p : out) p /= s;
    return out;
}

std::vector<double> posterior_predictive_all(const PosteriorTrace& trace) {
    if (trace.empty()) throw StateError("posterior_predictive: trace holds no samples");
    const LayerState& first = data_layer(trace.samples.front());
    const std::size_t N = first.Z.rows();
    const std::size_t D = first.U.cols();
    std::vector<double> out(N * D, 0.0);
    for (const auto& sample : trace.samples) {
        const ActiveIndex index(data_layer(sample));
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t d = 0; d < D; ++d) out[n * D + d] += index.prob(n, d);
        }
    }
    const double s = static_cast<double>(trace.samples.size());
    for (double& p : out) p /= s;
    return out;
}

std::vector<DimensionStat> dimension_stats(const PosteriorTrace& trace, const BinaryMatrix& X,
                                           const HoldoutMask* mask) {
    if (trace.empty()) throw StateError("dimension_stats: trace holds no samples");
    const std::size_t L = data_layer(trace.samples.front()).U.rows();
    std::vector<DimensionStat> stats(L + 1);
    const bool masked = mask != nullptr && !mask->empty();
    for (const auto& sample : trace.samples) {
        const LayerState& layer = data_layer(sample);
        if (layer.Z.rows() != X.rows() || layer.U.cols() != X.cols()) {
            throw ShapeError("dimension_stats: data shape does not match the trace");
        }
        const ActiveIndex index(layer);
        std::vector<std::size_t> won(L + 1, 0);
        std::size_t ones = 0;
        for (std::size_t n = 0; n < X.rows(); ++n) {
            X.for_each_in_row(n, [&](std::size_t d) {
                if (masked && mask->contains(n, d)) return;
                ++won[index.winner(n, d)];
                ++ones;
            });
        }
        for (std::size_t l = 0; l <= L; ++l) {
            if (ones > 0) stats[l].nu += static_cast<double>(won[l]) / static_cast<double>(ones);
            stats[l].lambda_hat += layer.reliabilities[l];
            stats[l].cardinality +=
                static_cast<double>(l < L ? layer.U.row_count(l) : layer.U.cols());
        }
    }
    const double s = static_cast<double>(trace.samples.size());
    for (auto& st : stats) {
        st.nu /= s;
        st.lambda_hat /= s;
        st.cardinality /= s;
    }
    return stats;
}

} // namespace maxmachine
