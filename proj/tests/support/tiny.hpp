#pragma once

// Random tiny model states shared by the unit and acceptance suites.

#include "maxmachine/binmat.hpp"
#include "maxmachine/hierarchy.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/model.hpp"
#include "maxmachine/sampler.hpp"

#include <random>
#include <vector>

namespace maxmachine::testing {

inline BinaryMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double density = 0.5) {
    BinaryMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m.assign(i, j, uniform01(rng) < density);
    }
    return m;
}

inline double random_prob(Rng& rng, double lo = 0.01, double hi = 0.99) {
    return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t random_size(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

/// Random factors, reliabilities and priors. Reliabilities occasionally tie.
inline FactorLayer random_layer(Rng& rng, std::size_t N, std::size_t D, std::size_t L) {
    PriorConfig priors;
    priors.q_u = random_prob(rng, 0.05, 0.95);
    priors.q_z = random_prob(rng, 0.05, 0.95);
    FactorLayer layer = FactorLayer::zeros(N, D, L, priors);
    layer.U = random_matrix(rng, L, D);
    layer.Z = random_matrix(rng, N, L);
    for (auto& r : layer.reliabilities) r = random_prob(rng);
    if (L >= 2 && uniform01(rng) < 0.2) layer.reliabilities[1] = layer.reliabilities[0];
    if (L >= 1 && uniform01(rng) < 0.1) layer.reliabilities[L] = layer.reliabilities[0];
    return layer;
}

inline HoldoutMask random_mask(Rng& rng, std::size_t N, std::size_t D, double fraction = 0.2) {
    std::vector<Cell> cells;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t d = 0; d < D; ++d) {
            if (uniform01(rng) < fraction) cells.push_back({n, d});
        }
    }
    return HoldoutMask(N, D, std::move(cells));
}

/// Random two-layer model with a random type assignment.
inline HierarchicalModel random_hierarchy(Rng& rng, std::size_t N, std::size_t D, std::size_t L, std::size_t T) {
    std::vector<std::uint32_t> types(N);
    for (auto& t : types) t = static_cast<std::uint32_t>(rng() % T);
    PriorConfig p1;
    p1.q_u = random_prob(rng, 0.05, 0.95);
    PriorConfig p2;
    p2.q_u = random_prob(rng, 0.05, 0.95);
    HierarchicalModel m = HierarchicalModel::two_layer(D, L, TypeClamp::from_types(types, T), p1, p2);
    m.layer1.U = random_matrix(rng, L, D);
    m.layer1.Z = random_matrix(rng, N, L);
    m.layer2->U = random_matrix(rng, T, L);
    for (auto& r : m.layer1.reliabilities) r = random_prob(rng);
    for (auto& r : m.layer2->reliabilities) r = random_prob(rng);
    return m;
}

} // namespace maxmachine::testing
