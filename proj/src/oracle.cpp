#include "maxmachine/oracle.hpp"

#include "maxmachine/errors.hpp"
#include "maxmachine/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace maxmachine {

void SynthConfig::validate() const {
    auto prob_closed = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (n_types < 1 || n_objects < n_types) throw ConfigError("synth: need N >= T >= 1");
    if (!(prob_closed(reliability_lo) && prob_closed(reliability_hi) && reliability_lo <= reliability_hi)) {
        throw ConfigError("synth: reliability range must be an interval in [0,1]");
    }
    if (!prob_closed(noise_floor) || !prob_closed(q_u) || !prob_closed(type_dim_density)) {
        throw ConfigError("synth: probabilities must lie in [0,1]");
    }
    if (dims_per_type_max > 0 && (dims_per_type_min > dims_per_type_max || dims_per_type_max > n_dims)) {
        throw ConfigError("synth: dims per type must satisfy min <= max <= L");
    }
    const double tlo = type_reliability_lo.value_or(reliability_lo);
    const double thi = type_reliability_hi.value_or(reliability_hi);
    if (!(prob_closed(tlo) && prob_closed(thi) && tlo <= thi)) {
        throw ConfigError("synth: type reliability range must be an interval in [0,1]");
    }
    if (!prob_closed(type_noise_floor.value_or(noise_floor))) throw ConfigError("synth: type floor must lie in [0,1]");
}

namespace {

double planted(double p) { return std::clamp(p, kPlantedMin, kPlantedMax); }

} // namespace

SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t N = cfg.n_objects;
    const std::size_t D = cfg.n_attributes;
    const std::size_t L = cfg.n_dims;
    const std::size_t T = cfg.n_types;
    Rng rng(cfg.seed);
    auto uniform_in = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };

    SynthResult out;
    out.V = BinaryMatrix(T, L);
    for (std::size_t t = 0; t < T; ++t) {
        if (cfg.dims_per_type_max > 0) {
            const std::size_t span = cfg.dims_per_type_max - cfg.dims_per_type_min + 1;
            const std::size_t k = cfg.dims_per_type_min + static_cast<std::size_t>(rng() % span);
            std::vector<std::size_t> dims(L);
            std::iota(dims.begin(), dims.end(), std::size_t{0});
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng() % (L - i));
                std::swap(dims[i], dims[j]);
                out.V.assign(t, dims[i], true);
            }
        } else {
            for (std::size_t l = 0; l < L; ++l) out.V.assign(t, l, uniform01(rng) < cfg.type_dim_density);
        }
    }

    out.reliabilities.resize(L + 1);
    for (std::size_t l = 0; l < L; ++l) out.reliabilities[l] = planted(uniform_in(cfg.reliability_lo, cfg.reliability_hi));
    out.reliabilities[L] = planted(cfg.noise_floor);
    out.type_reliabilities.resize(T + 1);
    const double tlo = cfg.type_reliability_lo.value_or(cfg.reliability_lo);
    const double thi = cfg.type_reliability_hi.value_or(cfg.reliability_hi);
    for (std::size_t t = 0; t < T; ++t) out.type_reliabilities[t] = planted(uniform_in(tlo, thi));
    out.type_reliabilities[T] = planted(cfg.type_noise_floor.value_or(cfg.noise_floor));

    out.type_of.resize(N);
    for (std::size_t n = 0; n < N; ++n) out.type_of[n] = static_cast<std::uint32_t>(n % T);

    out.U = BinaryMatrix(L, D);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t d = 0; d < D; ++d) out.U.assign(l, d, uniform01(rng) < cfg.q_u);
    }

    out.Z = BinaryMatrix(N, L);
    const double floor2 = out.type_reliabilities[T];
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t t = out.type_of[n];
        for (std::size_t l = 0; l < L; ++l) {
            const double p = out.V.test(t, l) ? std::max(out.type_reliabilities[t], floor2) : floor2;
            out.Z.assign(n, l, uniform01(rng) < p);
        }
    }

    out.X = BinaryMatrix(N, D);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t d = 0; d < D; ++d) {
            double p = out.reliabilities[L];
            for (std::size_t l = 0; l < L; ++l) {
                if (out.Z.test(n, l) && out.U.test(l, d)) p = std::max(p, out.reliabilities[l]);
            }
            out.X.assign(n, d, uniform01(rng) < p);
        }
    }
    out.data = dataset_from_matrix(out.X, out.type_of, T);
    return out;
}

SynthConfig scenario_s1(std::uint64_t seed) {
    SynthConfig c;
    c.n_objects = 2000;
    c.n_attributes = 50;
    c.n_dims = 8;
    c.n_types = 10;
    c.reliability_lo = 0.93;
    c.reliability_hi = 0.98;
    c.noise_floor = 0.02;
    c.q_u = 0.1;
    c.type_dim_density = 0.3;
    c.seed = seed;
    return c;
}

SynthConfig scenario_s2(std::uint64_t seed) {
    SynthConfig c;
    c.n_objects = 1500;
    c.n_attributes = 60;
    c.n_dims = 8;
    c.n_types = 6;
    c.reliability_lo = 0.7;
    c.reliability_hi = 0.98;
    c.noise_floor = 0.02;
    c.q_u = 0.15;
    c.dims_per_type_min = 2;
    c.dims_per_type_max = 3;
    c.type_reliability_lo = 0.4;
    c.type_reliability_hi = 0.6;
    c.type_noise_floor = 0.02;
    c.seed = seed;
    return c;
}

SynthConfig scenario_throughput(std::uint64_t seed) {
    SynthConfig c;
    c.n_objects = 50000;
    c.n_attributes = 200;
    c.n_dims = 30;
    c.n_types = 50;
    c.reliability_lo = 0.9;
    c.reliability_hi = 0.98;
    c.noise_floor = 0.02;
    c.q_u = 0.1;
    c.type_dim_density = 0.15;
    c.seed = seed;
    return c;
}

// ---------------------------------------------------------------------------
// Enumeration oracle. Everything below works on plain 0/1 arrays and recomputes
// the max over active dimensions directly; it shares no code with the sampler.

namespace {

struct DenseLayer {
    std::size_t N = 0, D = 0, L = 0;
    std::vector<std::uint8_t> U; // L×D
    std::vector<std::uint8_t> Z; // N×L
    std::vector<double> rel;     // L+1
};

DenseLayer to_dense_layer(const FactorLayer& layer) {
    DenseLayer s;
    s.N = layer.n_objects();
    s.D = layer.n_attributes();
    s.L = layer.n_dims();
    s.U = layer.U.to_dense();
    s.Z = layer.Z.to_dense();
    s.rel = layer.reliabilities;
    return s;
}

double cell_probability(const DenseLayer& s, std::size_t n, std::size_t d) {
    double best = s.rel[s.L];
    for (std::size_t l = 0; l < s.L; ++l) {
        if (s.Z[n * s.L + l] && s.U[l * s.D + d]) best = std::max(best, s.rel[l]);
    }
    return best;
}

// log p(data | layer) over observed cells; `data` is N×D dense, `held` marks skipped cells.
double data_log_likelihood(const DenseLayer& s, const std::vector<std::uint8_t>& data,
                           const std::vector<std::uint8_t>& held) {
    double total = 0.0;
    for (std::size_t n = 0; n < s.N; ++n) {
        for (std::size_t d = 0; d < s.D; ++d) {
            if (!held.empty() && held[n * s.D + d]) continue;
            const double p = cell_probability(s, n, d);
            total += std::log(data[n * s.D + d] ? p : 1.0 - p);
        }
    }
    return total;
}

double bernoulli_log_prior(const std::vector<std::uint8_t>& bits, double q) {
    double total = 0.0;
    for (auto b : bits) total += b ? std::log(q) : std::log(1.0 - q);
    return total;
}

double single_layer_log_joint(const DenseLayer& s, const PriorConfig& priors,
                              const std::vector<std::uint8_t>& data, const std::vector<std::uint8_t>& held) {
    return data_log_likelihood(s, data, held) + bernoulli_log_prior(s.U, priors.q_u) +
           bernoulli_log_prior(s.Z, priors.q_z);
}

std::vector<std::uint8_t> held_cells(const HoldoutMask& mask, std::size_t N, std::size_t D) {
    if (mask.empty()) return {};
    if (mask.n_objects() != N || mask.n_attributes() != D) throw ShapeError("oracle: mask shape mismatch");
    return mask.held().to_dense();
}

double conditional_from_log_weights(double lw0, double lw1) { return 1.0 / (1.0 + std::exp(lw0 - lw1)); }

std::uint8_t& target_bit(DenseLayer& s, FactorKind kind, std::size_t row, std::size_t col) {
    if (kind == FactorKind::U) {
        if (row >= s.L || col >= s.D) throw BoundsError("oracle target out of range");
        return s.U[row * s.D + col];
    }
    if (row >= s.N || col >= s.L) throw BoundsError("oracle target out of range");
    return s.Z[row * s.L + col];
}

} // namespace

ExactPosterior exact_posterior(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask) {
    layer.validate();
    if (X.rows() != layer.n_objects() || X.cols() != layer.n_attributes()) {
        throw ShapeError("exact_posterior: data shape mismatch");
    }
    DenseLayer s = to_dense_layer(layer);
    const auto data = X.to_dense();
    const auto held = held_cells(mask, s.N, s.D);
    const auto clamp_u = layer.clamp_u.to_dense();
    const auto clamp_z = layer.clamp_z.to_dense();

    // Free variables: pointers into s.U / s.Z.
    std::vector<std::uint8_t*> free_bits;
    for (std::size_t i = 0; i < s.U.size(); ++i) {
        if (!clamp_u[i]) free_bits.push_back(&s.U[i]);
    }
    for (std::size_t i = 0; i < s.Z.size(); ++i) {
        if (!clamp_z[i]) free_bits.push_back(&s.Z[i]);
    }
    if (free_bits.size() > kMaxOracleVariables) {
        throw SizeError("exact_posterior: " + std::to_string(free_bits.size()) + " free variables exceed " +
                        std::to_string(kMaxOracleVariables));
    }
    const std::size_t n_states = std::size_t{1} << free_bits.size();
    std::vector<double> log_w(n_states);
    for (std::size_t state = 0; state < n_states; ++state) {
        for (std::size_t b = 0; b < free_bits.size(); ++b) *free_bits[b] = (state >> b) & 1U;
        log_w[state] = single_layer_log_joint(s, layer.priors, data, held);
    }
    const double max_lw = *std::max_element(log_w.begin(), log_w.end());
    double total = 0.0;
    for (double lw : log_w) total += std::exp(lw - max_lw);

    ExactPosterior post;
    post.n_states = n_states;
    post.log_evidence = max_lw + std::log(total);
    post.u_marginal.assign(s.L * s.D, 0.0);
    post.z_marginal.assign(s.N * s.L, 0.0);
    post.predictive.assign(s.N * s.D, 0.0);
    for (std::size_t state = 0; state < n_states; ++state) {
        for (std::size_t b = 0; b < free_bits.size(); ++b) *free_bits[b] = (state >> b) & 1U;
        const double w = std::exp(log_w[state] - max_lw) / total;
        for (std::size_t i = 0; i < s.U.size(); ++i) post.u_marginal[i] += w * s.U[i];
        for (std::size_t i = 0; i < s.Z.size(); ++i) post.z_marginal[i] += w * s.Z[i];
        for (std::size_t n = 0; n < s.N; ++n) {
            for (std::size_t d = 0; d < s.D; ++d) post.predictive[n * s.D + d] += w * cell_probability(s, n, d);
        }
    }
    return post;
}

double exact_conditional(const FactorLayer& layer, const BinaryMatrix& X, const HoldoutMask& mask,
                         const OracleTarget& target) {
    if (target.layer != 0) throw BoundsError("exact_conditional: single-layer model has only layer 0");
    DenseLayer s = to_dense_layer(layer);
    if (X.rows() != s.N || X.cols() != s.D) throw ShapeError("exact_conditional: data shape mismatch");
    const auto data = X.to_dense();
    const auto held = held_cells(mask, s.N, s.D);
    std::uint8_t& bit = target_bit(s, target.matrix, target.row, target.col);
    bit = 0;
    const double lw0 = single_layer_log_joint(s, layer.priors, data, held);
    bit = 1;
    const double lw1 = single_layer_log_joint(s, layer.priors, data, held);
    return conditional_from_log_weights(lw0, lw1);
}

double exact_conditional(const HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask,
                         const OracleTarget& target) {
    if (!model.layer2) {
        return exact_conditional(model.layer1, X, mask, target);
    }
    DenseLayer lower = to_dense_layer(model.layer1);
    DenseLayer upper = to_dense_layer(*model.layer2);
    if (X.rows() != lower.N || X.cols() != lower.D) throw ShapeError("exact_conditional: data shape mismatch");
    const auto data = X.to_dense();
    const auto held = held_cells(mask, lower.N, lower.D);

    // Joint: p(X | U, Z) p(Z | V, C) p(U) p(V); the one-hot C is fixed.
    auto log_joint = [&]() {
        return data_log_likelihood(lower, data, held) + data_log_likelihood(upper, lower.Z, {}) +
               bernoulli_log_prior(lower.U, model.layer1.priors.q_u) +
               bernoulli_log_prior(upper.U, model.layer2->priors.q_u);
    };
    DenseLayer& owner = target.layer == 0 ? lower : upper;
    if (target.layer > 1) throw BoundsError("exact_conditional: layer out of range");
    if (target.layer == 1 && target.matrix == FactorKind::Z) {
        throw ContractError("exact_conditional: the type factor is clamped");
    }
    std::uint8_t& bit = target_bit(owner, target.matrix, target.row, target.col);
    bit = 0;
    const double lw0 = log_joint();
    bit = 1;
    const double lw1 = log_joint();
    return conditional_from_log_weights(lw0, lw1);
}

} // namespace maxmachine
