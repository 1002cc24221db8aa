#include "maxmachine/errors.hpp"
#include "maxmachine/model.hpp"

#include "tiny.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace maxmachine;
using namespace maxmachine::testing;

namespace {

FactorLayer layer_from(const std::vector<std::vector<int>>& Z, const std::vector<std::vector<int>>& U,
                       std::vector<double> rel) {
    FactorLayer layer = FactorLayer::zeros(Z.size(), U.front().size(), U.size());
    layer.Z = BinaryMatrix::from_dense(Z);
    layer.U = BinaryMatrix::from_dense(U);
    layer.reliabilities = std::move(rel);
    return layer;
}

// Direct evaluation: max over active reliabilities, clamped floor included.
double direct_prob(const FactorLayer& layer, std::size_t n, std::size_t d) {
    double best = layer.noise_floor();
    for (std::size_t l = 0; l < layer.n_dims(); ++l) {
        if (layer.Z.get(n, l) && layer.U.get(l, d)) best = std::max(best, layer.reliabilities[l]);
    }
    return best;
}

} // namespace

TEST_CASE("active_set") {
    auto layer = layer_from({{0, 0}}, {{1, 1}, {1, 1}}, {0.9, 0.8, 0.02});
    CHECK(active_set(layer, 0, 0) == std::vector<std::size_t>{2});

    layer = layer_from({{1, 1}}, {{0}, {1}}, {0.9, 0.8, 0.02});
    CHECK(active_set(layer, 0, 0) == std::vector<std::size_t>{1, 2});

    layer = layer_from({{1, 1, 1}}, {{1}, {1}, {1}}, {0.9, 0.8, 0.7, 0.02});
    CHECK(active_set(layer, 0, 0) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(active_set(layer, 1, 0), BoundsError);
}

TEST_CASE("point_prob") {
    auto layer = layer_from({{0, 0}}, {{1}, {1}}, {0.9, 0.7, 0.02});
    CHECK(point_prob(layer, 0, 0) == 0.02);

    layer = layer_from({{1, 1}}, {{1}, {1}}, {0.9, 0.7, 0.02});
    CHECK(point_prob(layer, 0, 0, true) == 0.9);
    CHECK(point_prob(layer, 0, 0, false) == doctest::Approx(0.1).epsilon(1e-15));

    // λ = 2 stored as σ(2); reference value from a 30-digit evaluation of the logistic function.
    layer = layer_from({{1}}, {{1}}, {logistic(2.0), 0.02});
    CHECK(point_prob(layer, 0, 0) == doctest::Approx(0.880797077977882444).epsilon(1e-14));
}

TEST_CASE("logistic and logit") {
    CHECK(logistic(0.0) == 0.5);
    CHECK(logistic(-800.0) >= 0.0);
    CHECK(logistic(800.0) == 1.0);
    CHECK(logit(0.05) == doctest::Approx(-2.94443897916644046).epsilon(1e-14));
    CHECK(logit(0.95) == doctest::Approx(-logit(0.05)).epsilon(1e-14));
}

TEST_CASE("or_point_prob") {
    const auto Z = BinaryMatrix::from_dense({{1, 0}});
    const auto U = BinaryMatrix::from_dense({{1, 0}, {0, 1}});
    CHECK(or_point_prob({0.0}, Z, U, 0, 0, true) == 0.5);
    CHECK(or_point_prob({0.0}, Z, U, 0, 1, false) == 0.5);
    CHECK(or_point_prob({3.0}, Z, U, 0, 0, true) == doctest::Approx(0.952574126822433219).epsilon(1e-14));
    CHECK(or_point_prob({3.0}, Z, U, 0, 1, true) == doctest::Approx(0.0474258731775667809).epsilon(1e-13));
    CHECK(or_point_prob({3.0}, Z, U, 0, 1, true) + or_point_prob({3.0}, Z, U, 0, 1, false) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(BmfConfig{-1.0}.validate(), ConfigError);
}

TEST_CASE("winner") {
    auto layer = layer_from({{1, 0, 1}}, {{1}, {1}, {1}}, {0.9, 0.5, 0.9, 0.02});
    CHECK(winner(layer, 0, 0) == 0);

    layer = layer_from({{0, 0}}, {{1}, {1}}, {0.9, 0.9, 0.02});
    CHECK(winner(layer, 0, 0) == 2);

    layer = layer_from({{0, 1, 0, 1}}, {{1}, {1}, {1}, {1}}, {0.99, 0.7, 0.5, 0.95, 0.02});
    CHECK(winner(layer, 0, 0) == 3);

    // The clamped dimension only wins when strictly more reliable.
    layer = layer_from({{1}}, {{1}}, {0.3, 0.3});
    CHECK(winner(layer, 0, 0) == 0);
    layer = layer_from({{1}}, {{1}}, {0.3, 0.31});
    CHECK(winner(layer, 0, 0) == 1);
}

TEST_CASE("log_likelihood") {
    auto layer = layer_from({{1}}, {{1}}, {0.9, 0.02});
    const auto X = BinaryMatrix::from_dense({{1}});
    CHECK(log_likelihood(layer, X, HoldoutMask(1, 1)) == doctest::Approx(-0.105360515657826301).epsilon(1e-14));
    CHECK(log_likelihood(layer, X, HoldoutMask(1, 1, {{0, 0}})) == 0.0);

    layer = layer_from({{0}, {0}}, {{1}}, {0.9, 0.5});
    const auto X2 = BinaryMatrix::from_dense({{1}, {0}});
    CHECK(log_likelihood(layer, X2, HoldoutMask(2, 1)) == doctest::Approx(2 * std::log(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(log_likelihood(layer, X, HoldoutMask(1, 1)), ShapeError);
}

TEST_CASE("property: normalization and parameterisation equivalence") {
    Rng rng(17);
    for (int c = 0; c < 500; ++c) {
        const auto N = random_size(rng, 1, 5);
        const auto D = random_size(rng, 1, 5);
        const auto L = random_size(rng, 0, 6);
        const auto layer = random_layer(rng, N, D, L);
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t d = 0; d < D; ++d) {
                const double p1 = point_prob(layer, n, d, true);
                REQUIRE(p1 + point_prob(layer, n, d, false) == doctest::Approx(1.0).epsilon(1e-15));
                // max in λ-space, then σ
                double lambda_max = logit(layer.noise_floor());
                for (auto l : active_set(layer, n, d)) lambda_max = std::max(lambda_max, logit(layer.reliabilities[l]));
                REQUIRE(std::abs(logistic(lambda_max) - p1) < 1e-12);
                REQUIRE(p1 == direct_prob(layer, n, d));
            }
        }
    }
}

TEST_CASE("property: activating a dimension never lowers p(x=1)") {
    Rng rng(19);
    for (int c = 0; c < 500; ++c) {
        const auto N = random_size(rng, 1, 4);
        const auto D = random_size(rng, 1, 4);
        const auto L = random_size(rng, 1, 5);
        auto layer = random_layer(rng, N, D, L);
        const auto before = layer;
        const bool flip_z = rng() & 1U;
        if (flip_z) {
            layer.Z.assign(rng() % N, rng() % L, true);
        } else {
            layer.U.assign(rng() % L, rng() % D, true);
        }
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t d = 0; d < D; ++d) REQUIRE(point_prob(layer, n, d) >= point_prob(before, n, d));
        }
    }
}

TEST_CASE("property: noiseless limit reproduces the Boolean product") {
    Rng rng(23);
    const double eps = 1e-6;
    for (int c = 0; c < 500; ++c) {
        const auto N = random_size(rng, 1, 8);
        const auto D = random_size(rng, 1, 8);
        const auto L = random_size(rng, 1, 5);
        auto layer = random_layer(rng, N, D, L);
        std::fill(layer.reliabilities.begin(), layer.reliabilities.end(), 1.0 - eps);
        layer.reliabilities.back() = eps;
        const auto X = boolean_or_product(layer.Z, layer.U);
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t d = 0; d < D; ++d) REQUIRE((point_prob(layer, n, d) > 0.5) == X.test(n, d));
        }
    }
}

TEST_CASE("property: permuting dimensions leaves the log-likelihood unchanged") {
    Rng rng(29);
    for (int c = 0; c < 500; ++c) {
        const auto N = random_size(rng, 1, 5);
        const auto D = random_size(rng, 1, 5);
        const auto L = random_size(rng, 1, 5);
        const auto layer = random_layer(rng, N, D, L);
        const auto X = random_matrix(rng, N, D);
        const auto mask = random_mask(rng, N, D);
        std::vector<std::size_t> perm(L);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        FactorLayer permuted = layer;
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t d = 0; d < D; ++d) permuted.U.assign(perm[l], d, layer.U.test(l, d));
            for (std::size_t n = 0; n < N; ++n) permuted.Z.assign(n, perm[l], layer.Z.test(n, l));
            permuted.reliabilities[perm[l]] = layer.reliabilities[l];
        }
        REQUIRE(log_likelihood(permuted, X, mask) == log_likelihood(layer, X, mask));
    }
}

TEST_CASE("ActiveIndex agrees with recomputation under incremental updates") {
    Rng rng(31);
    for (int c = 0; c < 300; ++c) {
        const auto N = random_size(rng, 1, 6);
        const auto D = random_size(rng, 1, 6);
        const auto L = random_size(rng, 1, 70);
        auto layer = random_layer(rng, N, D, L);
        for (auto& r : layer.reliabilities) r = std::round(r * 10) / 10 + 0.001; // force ties
        ActiveIndex index(layer);
        for (int step = 0; step < 20; ++step) {
            if (rng() & 1U) {
                const auto n = rng() % N, l = rng() % L;
                const bool v = rng() & 1U;
                layer.Z.assign(n, l, v);
                index.set_z(n, l, v);
            } else {
                const auto l = rng() % L, d = rng() % D;
                const bool v = rng() & 1U;
                layer.U.assign(l, d, v);
                index.set_u(l, d, v);
            }
        }
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t d = 0; d < D; ++d) REQUIRE(index.winner(n, d) == winner(layer, n, d));
        }
        for (auto& r : layer.reliabilities) r = random_prob(rng);
        index.rerank(layer.reliabilities);
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t d = 0; d < D; ++d) REQUIRE(index.winner(n, d) == winner(layer, n, d));
        }
    }
}

TEST_CASE("posterior_predictive") {
    CHECK_THROWS_AS(posterior_predictive(PosteriorTrace{}, std::vector<Cell>{{0, 0}}), StateError);

    const auto a = layer_from({{1}}, {{1}}, {0.9, 0.02});
    const auto b = layer_from({{1}}, {{1}}, {0.1, 0.02});
    PosteriorTrace trace;
    trace.samples.push_back({{a.state()}});
    const std::vector<Cell> cell{{0, 0}};
    CHECK(posterior_predictive(trace, cell)[0] == point_prob(a, 0, 0));
    trace.samples.push_back({{b.state()}});
    CHECK(posterior_predictive(trace, cell)[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(posterior_predictive_all(trace) == posterior_predictive(trace, cell));
}

TEST_CASE("dimension_stats") {
    CHECK_THROWS_AS(dimension_stats(PosteriorTrace{}, BinaryMatrix(1, 1)), StateError);

    // One dimension covers every one.
    auto layer = layer_from({{1}, {1}}, {{1, 1}}, {0.9, 0.02});
    PosteriorTrace trace;
    trace.samples.push_back({{layer.state()}});
    auto stats = dimension_stats(trace, BinaryMatrix::from_dense({{1, 1}, {1, 0}}));
    CHECK(stats[0].nu == 1.0);
    CHECK(stats[1].nu == 0.0);
    CHECK(stats[0].lambda_hat == 0.9);
    CHECK(stats[0].cardinality == 2.0);
    CHECK(stats[1].cardinality == 2.0);

    stats = dimension_stats(trace, BinaryMatrix(2, 2));
    CHECK(stats[0].nu == 0.0);
    CHECK(stats[1].nu == 0.0);

    // Planted: dimension 0 covers attributes {0,1,2}, dimension 1 covers {3}; one object.
    layer = layer_from({{1, 1}}, {{1, 1, 1, 0}, {0, 0, 0, 1}}, {0.9, 0.8, 0.02});
    trace.samples.assign(1, {{layer.state()}});
    stats = dimension_stats(trace, BinaryMatrix::from_dense({{1, 1, 1, 1}}));
    CHECK(stats[0].nu == 0.75);
    CHECK(stats[1].nu == 0.25);
    CHECK(stats[2].nu == 0.0);
}

TEST_CASE("property: nu sums to one when X has a one") {
    Rng rng(37);
    for (int c = 0; c < 500; ++c) {
        const auto N = random_size(rng, 1, 5);
        const auto D = random_size(rng, 1, 5);
        const auto L = random_size(rng, 0, 4);
        PosteriorTrace trace;
        for (int s = 0; s < 3; ++s) trace.samples.push_back({{random_layer(rng, N, D, L).state()}});
        auto X = random_matrix(rng, N, D);
        X.assign(0, 0, true);
        double total = 0.0;
        for (const auto& st : dimension_stats(trace, X)) total += st.nu;
        REQUIRE(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("layer validation") {
    auto layer = FactorLayer::zeros(2, 3, 2);
    CHECK_NOTHROW(layer.validate());
    CHECK(layer.reliabilities[0] == 1.0 - 1e-6);
    CHECK(layer.noise_floor() == 0.5);
    layer.reliabilities[0] = 1.0;
    CHECK_THROWS_AS(layer.validate(), ConfigError);
    layer.reliabilities.pop_back();
    CHECK_THROWS_AS(layer.validate(), ShapeError);
    PriorConfig bad;
    bad.q_u = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
