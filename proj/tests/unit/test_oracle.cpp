#include "maxmachine/errors.hpp"
#include "maxmachine/oracle.hpp"

#include "tiny.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace maxmachine;
using namespace maxmachine::testing;

TEST_CASE("noiseless generator reproduces the Boolean product") {
    SynthConfig cfg;
    cfg.n_objects = 40;
    cfg.n_attributes = 12;
    cfg.n_dims = 3;
    cfg.n_types = 4;
    cfg.reliability_lo = 1.0;
    cfg.reliability_hi = 1.0;
    cfg.noise_floor = 0.0;
    cfg.type_noise_floor = 0.0;
    cfg.seed = 5;
    const auto g = generate(cfg);
    CHECK(g.reliabilities.front() == kPlantedMax);
    CHECK(g.reliabilities.back() == kPlantedMin);
    CHECK(g.X == boolean_or_product(g.Z, g.U));
    CHECK(g.Z == boolean_or_product(TypeClamp::from_types(g.type_of, 4).one_hot, g.V));
}

TEST_CASE("L = 0 gives pure noise") {
    SynthConfig cfg;
    cfg.n_objects = 400;
    cfg.n_attributes = 50;
    cfg.n_dims = 0;
    cfg.noise_floor = 0.2;
    cfg.seed = 9;
    const auto g = generate(cfg);
    CHECK(g.U.rows() == 0);
    CHECK(g.X.density() == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("generator is deterministic and shapes agree") {
    const auto a = generate(scenario_s2(4));
    const auto b = generate(scenario_s2(4));
    CHECK(a.X == b.X);
    CHECK(a.data == b.data);
    CHECK(a.X.rows() == 1500);
    CHECK(a.V.rows() == 6);
    CHECK(a.X == a.data.to_matrix());
    for (std::size_t t = 0; t < a.V.rows(); ++t) {
        CHECK(a.V.row_count(t) >= 2);
        CHECK(a.V.row_count(t) <= 3);
    }
    CHECK(generate(scenario_s2(5)).X != a.X);
    SynthConfig bad;
    bad.reliability_lo = 0.9;
    bad.reliability_hi = 0.1;
    CHECK_THROWS_AS(generate(bad), ConfigError);
}

TEST_CASE("exact_posterior examples") {
    // Flat likelihood: the marginal equals the prior.
    auto layer = FactorLayer::zeros(1, 1, 1);
    layer.reliabilities = {0.5, 0.5};
    layer.priors.q_z = 0.3;
    auto post = exact_posterior(layer, BinaryMatrix::from_dense({{1}}), HoldoutMask(1, 1));
    CHECK(post.z_marginal[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(post.n_states == 4);

    // Four-term enumeration: p(z = u = 1 | x = 1) = 0.9375.
    layer.reliabilities = {0.9, 0.02};
    layer.priors.q_z = 0.5;
    layer.priors.q_u = 0.5;
    post = exact_posterior(layer, BinaryMatrix::from_dense({{1}}), HoldoutMask(1, 1));
    const double joint = 0.9375;
    CHECK(post.predictive[0] == doctest::Approx(joint * 0.9 + (1 - joint) * 0.02).epsilon(1e-14));
    CHECK(post.z_marginal[0] == doctest::Approx(joint + (1 - joint) / 3.0).epsilon(1e-14));

    CHECK_NOTHROW(exact_posterior(FactorLayer::zeros(4, 4, 2), BinaryMatrix(4, 4), HoldoutMask(4, 4)));
    CHECK_THROWS_AS(exact_posterior(FactorLayer::zeros(5, 4, 2), BinaryMatrix(5, 4), HoldoutMask(5, 4)), SizeError);
}

TEST_CASE("property: predictive lies within the reliability range") {
    Rng rng(401);
    for (int c = 0; c < 500; ++c) {
        const auto N = random_size(rng, 1, 2);
        const auto D = random_size(rng, 1, 3);
        const auto L = random_size(rng, 1, 2);
        const auto layer = random_layer(rng, N, D, L);
        const auto post = exact_posterior(layer, random_matrix(rng, N, D), random_mask(rng, N, D));
        const auto [lo, hi] = std::minmax_element(layer.reliabilities.begin(), layer.reliabilities.end());
        for (double p : post.predictive) {
            REQUIRE(p >= *lo - 1e-12);
            REQUIRE(p <= *hi + 1e-12);
        }
        for (double p : post.z_marginal) REQUIRE((p >= 0.0 && p <= 1.0));
    }
}

TEST_CASE("exact_conditional examples") {
    // The bit has no effect on the likelihood and the prior is flat.
    auto layer = FactorLayer::zeros(1, 2, 1);
    layer.priors.q_z = 0.5;
    layer.reliabilities = {0.9, 0.1};
    CHECK(exact_conditional(layer, BinaryMatrix(1, 2), HoldoutMask(1, 2), {0, FactorKind::Z, 0, 0}) == 0.5);
    CHECK_THROWS_AS(exact_conditional(layer, BinaryMatrix(1, 2), HoldoutMask(1, 2), {1, FactorKind::Z, 0, 0}),
                    BoundsError);

    auto m = HierarchicalModel::two_layer(2, 1, TypeClamp::from_types({0}, 1));
    CHECK_THROWS_AS(exact_conditional(m, BinaryMatrix(1, 2), HoldoutMask(1, 2), {1, FactorKind::Z, 0, 0}),
                    ContractError);
}

TEST_CASE("Gibbs marginals approach the exact posterior") {
    auto layer = FactorLayer::zeros(2, 2, 1);
    layer.reliabilities = {0.85, 0.1};
    layer.priors.q_u = 0.3;
    const auto X = BinaryMatrix::from_dense({{1, 0}, {1, 1}});
    const HoldoutMask mask(2, 2);
    const auto exact = exact_posterior(layer, X, mask);
    Rng rng(1);
    std::vector<double> z(2, 0.0);
    const int iters = 40000;
    LayerSampler sampler(layer, X, mask);
    const auto prior = ZPriorLogits::uniform(logit(layer.priors.q_z));
    for (int i = 0; i < iters; ++i) {
        sampler.sweep(layer, rng, prior);
        for (std::size_t n = 0; n < 2; ++n) z[n] += layer.Z.test(n, 0);
    }
    for (std::size_t n = 0; n < 2; ++n) CHECK(std::abs(z[n] / iters - exact.z_marginal[n]) < 0.02);
}
