#include "maxmachine/baseline.hpp"
#include "maxmachine/errors.hpp"

#include <doctest.h>

using namespace maxmachine;

namespace {

// n_objects objects of a single type; the first `present` carry attribute 0.
TripletDataset one_type(std::size_t n_objects, std::size_t present) {
    BinaryMatrix X(n_objects, 2);
    for (std::size_t n = 0; n < present; ++n) X.assign(n, 0, true);
    return dataset_from_matrix(X, std::vector<std::uint32_t>(n_objects, 0), 1);
}

} // namespace

TEST_CASE("add-beta smoothing") {
    const auto data = one_type(4, 3);
    const auto table = fit_baseline(data, HoldoutMask(4, 2), 0.5);
    CHECK(predict_baseline(table, 0, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(predict_baseline_type(table, 0, 0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(predict_baseline(table, 0, 1) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("beta zero gives raw frequencies") {
    const auto table = fit_baseline(one_type(4, 3), HoldoutMask(4, 2), 0.0);
    CHECK(predict_baseline(table, 1, 1) == 0.0);
    CHECK(predict_baseline(table, 1, 0) == 0.75);
}

TEST_CASE("fully held-out type falls back to the prior") {
    std::vector<Cell> all;
    for (std::size_t n = 0; n < 4; ++n) {
        for (std::size_t d = 0; d < 2; ++d) all.push_back({n, d});
    }
    const auto table = fit_baseline(one_type(4, 3), HoldoutMask(4, 2, all), 0.5);
    CHECK(predict_baseline(table, 0, 0) == 0.5);
    CHECK(predict_baseline(fit_baseline(one_type(4, 3), HoldoutMask(4, 2, all), 0.0), 0, 0) == 0.0);
}

TEST_CASE("unknown type uses the global frequency") {
    // 100 objects: 10 carry attribute 0; object 0 has no type.
    BinaryMatrix X(100, 1);
    for (std::size_t n = 0; n < 10; ++n) X.assign(n, 0, true);
    std::vector<std::uint32_t> types(100, 0);
    auto data = dataset_from_matrix(X, types, 1);
    data.type_names.push_back(kUnknownType);
    data.type_of[0] = 1;
    const auto table = fit_baseline(data, HoldoutMask(100, 1), 0.0);
    CHECK(table.unknown_type == 1);
    CHECK(predict_baseline(table, 0, 0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(predict_baseline(table, 5, 0) == doctest::Approx(9.0 / 99.0).epsilon(1e-15));
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(fit_baseline(one_type(2, 1), HoldoutMask(2, 2), -1.0), ConfigError);
    CHECK_THROWS_AS(fit_baseline(one_type(2, 1), HoldoutMask(3, 2, {{2, 0}}), 0.5), ShapeError);
    const auto table = fit_baseline(one_type(2, 1), HoldoutMask(2, 2), 0.5);
    CHECK_THROWS_AS(predict_baseline(table, 2, 0), BoundsError);
}
