#include "maxmachine/binmat.hpp"
#include "maxmachine/errors.hpp"

#include "tiny.hpp"

#include <doctest.h>

using namespace maxmachine;
using maxmachine::testing::random_matrix;

namespace {

BinaryMatrix naive_or_product(const BinaryMatrix& Z, const BinaryMatrix& U) {
    BinaryMatrix out(Z.rows(), U.cols());
    for (std::size_t n = 0; n < Z.rows(); ++n) {
        for (std::size_t d = 0; d < U.cols(); ++d) {
            int prod = 1;
            for (std::size_t l = 0; l < Z.cols(); ++l) prod *= 1 - (Z.test(n, l) && U.test(l, d));
            out.assign(n, d, prod == 0);
        }
    }
    return out;
}

} // namespace

TEST_CASE("from_dense examples") {
    CHECK(BinaryMatrix::from_dense({{1, 0}, {0, 1}}).density() == 0.5);
    const auto ones = BinaryMatrix::from_dense(std::vector<std::vector<int>>{std::vector<int>(70, 1)});
    CHECK(ones.density() == 1.0);
    CHECK(ones.words_per_row() == 2);
    CHECK(BinaryMatrix(3, 3).density() == 0.0);
}

TEST_CASE("from_dense rejects bad input") {
    const std::vector<std::uint8_t> five(5, 0);
    CHECK_THROWS_AS(BinaryMatrix::from_dense(five, 2, 3), ShapeError);
    const std::vector<std::uint8_t> two{0, 2};
    CHECK_THROWS_AS(BinaryMatrix::from_dense(two, 1, 2), ContractError);
    CHECK_THROWS_AS(BinaryMatrix::from_dense({{1, 0}, {1}}), ShapeError);
}

TEST_CASE("to_dense round-trips") {
    Rng rng(11);
    for (int c = 0; c < 50; ++c) {
        const auto rows = maxmachine::testing::random_size(rng, 1, 9);
        const auto cols = maxmachine::testing::random_size(rng, 1, 140);
        const auto m = random_matrix(rng, rows, cols);
        const auto dense = m.to_dense();
        CHECK(BinaryMatrix::from_dense(dense, rows, cols) == m);
    }
}

TEST_CASE("checked access reports bounds errors") {
    BinaryMatrix m(2, 3);
    CHECK_THROWS_AS(m.get(2, 0), BoundsError);
    CHECK_THROWS_AS(m.set(0, 3, true), BoundsError);
}

TEST_CASE("boolean_or_product examples") {
    const auto Z = BinaryMatrix::from_dense({{1, 0}});
    const auto U = BinaryMatrix::from_dense({{0, 1}, {1, 1}});
    CHECK(boolean_or_product(Z, U) == BinaryMatrix::from_dense({{0, 1}}));

    Rng rng(3);
    const auto arbitrary = random_matrix(rng, 4, 77);
    BinaryMatrix identity(4, 4);
    for (std::size_t i = 0; i < 4; ++i) identity.assign(i, i, true);
    CHECK(boolean_or_product(identity, arbitrary) == arbitrary);
    CHECK(boolean_or_product(BinaryMatrix(5, 4), arbitrary).count() == 0);
    CHECK_THROWS_AS(boolean_or_product(BinaryMatrix(2, 3), arbitrary), ShapeError);
}

TEST_CASE("property: boolean_or_product matches the naive triple loop") {
    Rng rng(2024);
    for (int c = 0; c < 500; ++c) {
        const auto N = maxmachine::testing::random_size(rng, 1, 64);
        const auto L = maxmachine::testing::random_size(rng, 1, 64);
        const auto D = maxmachine::testing::random_size(rng, 1, 64);
        const double density = maxmachine::testing::random_prob(rng, 0.02, 0.5);
        const auto Z = random_matrix(rng, N, L, density);
        const auto U = random_matrix(rng, L, D, density);
        REQUIRE(boolean_or_product(Z, U) == naive_or_product(Z, U));
    }
}

TEST_CASE("property: set/get fuzzing leaves other entries unchanged") {
    Rng rng(5);
    for (int c = 0; c < 500; ++c) {
        const auto rows = maxmachine::testing::random_size(rng, 1, 6);
        const auto cols = maxmachine::testing::random_size(rng, 1, 200);
        auto m = random_matrix(rng, rows, cols);
        const auto before = m.to_dense();
        const auto i = rng() % rows;
        const auto j = rng() % cols;
        const bool v = rng() & 1U;
        m.set(i, j, v);
        CHECK(m.get(i, j) == v);
        auto after = m.to_dense();
        after[i * cols + j] = before[i * cols + j];
        CHECK(after == before);
    }
}

TEST_CASE("property: transpose is an involution and padding stays zero") {
    Rng rng(8);
    for (int c = 0; c < 500; ++c) {
        const auto m = random_matrix(rng, maxmachine::testing::random_size(rng, 1, 70),
                                     maxmachine::testing::random_size(rng, 1, 130));
        REQUIRE(m.transpose().transpose() == m);
        REQUIRE(m.transpose().count() == m.count());
    }
    BinaryMatrix full(3, 65, true);
    CHECK(full.count() == 3 * 65);
    full.fill(true);
    CHECK(full.count() == 3 * 65);
    CHECK(full.row(0)[1] == 1U);
}

TEST_CASE("first common bit helpers") {
    const std::vector<BinaryMatrix::word_type> a{0b1010, 0b1};
    const std::vector<BinaryMatrix::word_type> b{0b1110, 0b1};
    CHECK(first_common_bit(a, b) == 1);
    CHECK(first_common_bit_except(a, b, 1) == 3);
    CHECK(first_common_bit_except(a, b, 3) == 1);
    const std::vector<BinaryMatrix::word_type> c{0b1000, 0b1};
    CHECK(first_common_bit_except(c, b, 3) == 64);
    const std::vector<BinaryMatrix::word_type> zero{0, 0};
    CHECK(first_common_bit(a, zero) == npos);
}
