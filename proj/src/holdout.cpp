#include "maxmachine/holdout.hpp"

#include "maxmachine/errors.hpp"

#include <algorithm>
#include <string>

namespace maxmachine {

HoldoutMask::HoldoutMask(std::size_t n_objects, std::size_t n_attributes)
    : held_(n_objects, n_attributes) {}

HoldoutMask::HoldoutMask(std::size_t n_objects, std::size_t n_attributes, std::vector<Cell> cells,
                         double fraction, std::uint64_t seed)
    : cells_(std::move(cells)), held_(n_objects, n_attributes), fraction_(fraction), seed_(seed) {
    std::sort(cells_.begin(), cells_.end());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const Cell& c = cells_[i];
        if (c.n >= n_objects || c.d >= n_attributes) {
            throw BoundsError("holdout cell (" + std::to_string(c.n) + ", " + std::to_string(c.d) +
                              ") out of range");
        }
        if (i > 0 && cells_[i - 1] == c) throw ContractError("holdout cells must be unique");
        held_.assign(c.n, c.d, true);
    }
}

BinaryMatrix HoldoutMask::observed() const {
    BinaryMatrix obs(held_.rows(), held_.cols(), true);
    for (const Cell& c : cells_) obs.assign(c.n, c.d, false);
    return obs;
}

} // namespace maxmachine
