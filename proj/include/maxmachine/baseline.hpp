#pragma once

#include "maxmachine/dataset.hpp"
#include "maxmachine/holdout.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace maxmachine {

/// Per (type, attribute) frequencies of applied attributes over observed cells.
struct TypeFrequencyTable {
    std::size_t n_types = 0;
    std::size_t n_attributes = 0;
    std::vector<std::uint64_t> counts; ///< T×D observed ones
    std::vector<std::uint64_t> totals; ///< T×D observed cells
    std::vector<std::uint64_t> global_counts; ///< D
    std::vector<std::uint64_t> global_totals; ///< D
    std::vector<std::uint32_t> type_of;
    std::size_t unknown_type = 0; ///< objects of this type use the global frequency
    double smoothing = 0.5;
};

/// Tabulates counts over cells not held out. Throws ConfigError for negative smoothing.
TypeFrequencyTable fit_baseline(const TripletDataset& data, const HoldoutMask& mask, double smoothing = 0.5);

/// (count + β) / (total + 2β) for the object's type; the global frequency for unknown types.
/// Returns 0 when both the count total and β are zero.
double predict_baseline(const TypeFrequencyTable& table, std::size_t n, std::size_t d);
double predict_baseline_type(const TypeFrequencyTable& table, std::size_t type, std::size_t d);

} // namespace maxmachine
