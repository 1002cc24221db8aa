#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace maxmachine {

/**
 * Dense 0/1 matrix with row-major bit packing.
 *
 * Each row occupies a whole number of 64-bit words. Bits past `cols()` in the
 * last word of a row are kept at zero, so population counts and word-level
 * Boolean operations never need masking.
 *
 * Concurrent writes to distinct rows are safe; writes to the same row are not.
 */
class BinaryMatrix {
  public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols, bool value = false);

    /// Builds from a row-major grid of 0/1 values. Throws ShapeError on size mismatch
    /// and ContractError on entries other than 0 or 1.
    static BinaryMatrix from_dense(std::span<const std::uint8_t> values, std::size_t rows,
                                   std::size_t cols);
    static BinaryMatrix from_dense(const std::vector<std::vector<int>>& grid);

    std::vector<std::uint8_t> to_dense() const;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return words_per_row_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    // Unchecked access; the sampler's inner loops use these.
    bool test(std::size_t i, std::size_t j) const noexcept {
        return (bits_[i * words_per_row_ + j / word_bits] >> (j % word_bits)) & 1U;
    }
    void assign(std::size_t i, std::size_t j, bool v) noexcept {
        word_type& w = bits_[i * words_per_row_ + j / word_bits];
        const word_type mask = word_type{1} << (j % word_bits);
        w = v ? (w | mask) : (w & ~mask);
    }
    void toggle(std::size_t i, std::size_t j) noexcept {
        bits_[i * words_per_row_ + j / word_bits] ^= word_type{1} << (j % word_bits);
    }

    // Checked access; throws BoundsError.
    bool get(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, bool v);

    std::span<const word_type> row(std::size_t i) const noexcept {
        return {bits_.data() + i * words_per_row_, words_per_row_};
    }
    std::span<word_type> row(std::size_t i) noexcept {
        return {bits_.data() + i * words_per_row_, words_per_row_};
    }

    std::size_t count() const noexcept;
    std::size_t row_count(std::size_t i) const noexcept;
    double density() const noexcept;

    BinaryMatrix transpose() const;
    void fill(bool v) noexcept;

    /// Calls f(j) for every set column j of row i, in increasing order.
    template <typename F> void for_each_in_row(std::size_t i, F&& f) const {
        const word_type* base = bits_.data() + i * words_per_row_;
        for (std::size_t w = 0; w < words_per_row_; ++w) {
            word_type word = base[w];
            while (word != 0) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(word));
                f(w * word_bits + bit);
                word &= word - 1;
            }
        }
    }

    friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

  private:
    void clear_padding() noexcept;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_per_row_ = 0;
    std::vector<word_type> bits_;
};

/// result[n,d] = OR_l (z[n,l] AND u[l,d]). Throws ShapeError if Z.cols() != U.rows().
BinaryMatrix boolean_or_product(const BinaryMatrix& Z, const BinaryMatrix& U);

/// Index of the lowest bit set in both a and b, or `npos` if none.
std::size_t first_common_bit(std::span<const BinaryMatrix::word_type> a,
                             std::span<const BinaryMatrix::word_type> b) noexcept;

/// As first_common_bit, ignoring bit `skip`.
std::size_t first_common_bit_except(std::span<const BinaryMatrix::word_type> a,
                                    std::span<const BinaryMatrix::word_type> b,
                                    std::size_t skip) noexcept;

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

} // namespace maxmachine
