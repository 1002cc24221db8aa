#pragma once

#include "maxmachine/binmat.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace maxmachine {

struct Cell {
    std::size_t n = 0;
    std::size_t d = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Cells of an N×D matrix hidden from training and scored at test time.
class HoldoutMask {
  public:
    HoldoutMask() = default;
    /// Empty mask: every cell observed.
    HoldoutMask(std::size_t n_objects, std::size_t n_attributes);
    /// Throws BoundsError for out-of-range cells and ContractError for duplicates.
    HoldoutMask(std::size_t n_objects, std::size_t n_attributes, std::vector<Cell> cells,
                double fraction = 0.0, std::uint64_t seed = 0);

    std::size_t n_objects() const noexcept { return held_.rows(); }
    std::size_t n_attributes() const noexcept { return held_.cols(); }
    const std::vector<Cell>& cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }
    double fraction() const noexcept { return fraction_; }
    std::uint64_t seed() const noexcept { return seed_; }

    bool contains(std::size_t n, std::size_t d) const noexcept { return held_.test(n, d); }
    /// N×D, 1 where held out.
    const BinaryMatrix& held() const noexcept { return held_; }
    /// N×D, 1 where observed.
    BinaryMatrix observed() const;

  private:
    std::vector<Cell> cells_;
    BinaryMatrix held_;
    double fraction_ = 0.0;
    std::uint64_t seed_ = 0;
};

} // namespace maxmachine
