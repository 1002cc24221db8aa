#include "maxmachine/binmat.hpp"

#include "maxmachine/errors.hpp"

#include <algorithm>
#include <string>

namespace maxmachine {

namespace {

std::size_t words_for(std::size_t cols) {
    return (cols + BinaryMatrix::word_bits - 1) / BinaryMatrix::word_bits;
}

} // namespace

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols, bool value)
    : rows_(rows), cols_(cols), words_per_row_(words_for(cols)),
      bits_(rows * words_per_row_, value ? ~word_type{0} : word_type{0}) {
    if (value) clear_padding();
}

BinaryMatrix BinaryMatrix::from_dense(std::span<const std::uint8_t> values, std::size_t rows,
                                      std::size_t cols) {
    if (values.size() != rows * cols) {
        throw ShapeError("from_dense: expected " + std::to_string(rows * cols) + " values, got " +
                         std::to_string(values.size()));
    }
    BinaryMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const auto v = values[i * cols + j];
            if (v > 1) throw ContractError("from_dense: entries must be 0 or 1");
            if (v) m.assign(i, j, true);
        }
    }
    return m;
}

BinaryMatrix BinaryMatrix::from_dense(const std::vector<std::vector<int>>& grid) {
    const std::size_t rows = grid.size();
    const std::size_t cols = rows ? grid.front().size() : 0;
    std::vector<std::uint8_t> flat;
    flat.reserve(rows * cols);
    for (const auto& r : grid) {
        if (r.size() != cols) throw ShapeError("from_dense: ragged grid");
        for (int v : r) {
            if (v != 0 && v != 1) throw ContractError("from_dense: entries must be 0 or 1");
            flat.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return from_dense(flat, rows, cols);
}

std::vector<std::uint8_t> BinaryMatrix::to_dense() const {
    std::vector<std::uint8_t> out(rows_ * cols_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for_each_in_row(i, [&](std::size_t j) { out[i * cols_ + j] = 1; });
    }
    return out;
}

bool BinaryMatrix::get(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) {
        throw BoundsError("BinaryMatrix index (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") out of range");
    }
    return test(i, j);
}

void BinaryMatrix::set(std::size_t i, std::size_t j, bool v) {
    if (i >= rows_ || j >= cols_) {
        throw BoundsError("BinaryMatrix index (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") out of range");
    }
    assign(i, j, v);
}

std::size_t BinaryMatrix::count() const noexcept {
    std::size_t total = 0;
    for (word_type w : bits_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
}

std::size_t BinaryMatrix::row_count(std::size_t i) const noexcept {
    std::size_t total = 0;
    for (word_type w : row(i)) total += static_cast<std::size_t>(std::popcount(w));
    return total;
}

double BinaryMatrix::density() const noexcept {
    if (empty()) return 0.0;
    return static_cast<double>(count()) / static_cast<double>(rows_ * cols_);
}

BinaryMatrix BinaryMatrix::transpose() const {
    BinaryMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for_each_in_row(i, [&](std::size_t j) { t.assign(j, i, true); });
    }
    return t;
}

void BinaryMatrix::fill(bool v) noexcept {
    std::fill(bits_.begin(), bits_.end(), v ? ~word_type{0} : word_type{0});
    if (v) clear_padding();
}

void BinaryMatrix::clear_padding() noexcept {
    const std::size_t tail = cols_ % word_bits;
    if (tail == 0 || words_per_row_ == 0) return;
    const word_type keep = (word_type{1} << tail) - 1;
    for (std::size_t i = 0; i < rows_; ++i) bits_[i * words_per_row_ + words_per_row_ - 1] &= keep;
}

BinaryMatrix boolean_or_product(const BinaryMatrix& Z, const BinaryMatrix& U) {
    if (Z.cols() != U.rows()) {
        throw ShapeError("boolean_or_product: inner dimensions " + std::to_string(Z.cols()) +
                         " and " + std::to_string(U.rows()) + " differ");
    }
    BinaryMatrix out(Z.rows(), U.cols());
    for (std::size_t n = 0; n < Z.rows(); ++n) {
        auto dst = out.row(n);
        Z.for_each_in_row(n, [&](std::size_t l) {
            const auto src = U.row(l);
            for (std::size_t w = 0; w < dst.size(); ++w) dst[w] |= src[w];
        });
    }
    return out;
}

std::size_t first_common_bit(std::span<const BinaryMatrix::word_type> a,
                             std::span<const BinaryMatrix::word_type> b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t w = 0; w < n; ++w) {
        const auto both = a[w] & b[w];
        if (both != 0) return w * BinaryMatrix::word_bits + std::countr_zero(both);
    }
    return npos;
}

std::size_t first_common_bit_except(std::span<const BinaryMatrix::word_type> a,
                                    std::span<const BinaryMatrix::word_type> b,
                                    std::size_t skip) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    const std::size_t skip_word = skip / BinaryMatrix::word_bits;
    const auto skip_mask = ~(BinaryMatrix::word_type{1} << (skip % BinaryMatrix::word_bits));
    for (std::size_t w = 0; w < n; ++w) {
        auto both = a[w] & b[w];
        if (w == skip_word) both &= skip_mask;
        if (both != 0) return w * BinaryMatrix::word_bits + std::countr_zero(both);
    }
    return npos;
}

} // namespace maxmachine
