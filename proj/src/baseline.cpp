#include "maxmachine/baseline.hpp"

#include "maxmachine/errors.hpp"

namespace maxmachine {

namespace {

double smoothed(std::uint64_t count, std::uint64_t total, double beta) {
    const double denom = static_cast<double>(total) + 2.0 * beta;
    if (denom <= 0.0) return 0.0;
    return (static_cast<double>(count) + beta) / denom;
}

} // namespace

TypeFrequencyTable fit_baseline(const TripletDataset& data, const HoldoutMask& mask, double smoothing) {
    if (!(smoothing >= 0.0)) throw ConfigError("baseline smoothing must be nonnegative");
    data.validate();
    const std::size_t N = data.n_objects();
    const std::size_t D = data.n_attributes();
    if (!mask.empty() && (mask.n_objects() != N || mask.n_attributes() != D)) {
        throw ShapeError("holdout mask shape does not match the data");
    }
    TypeFrequencyTable table;
    table.n_types = data.n_types();
    table.n_attributes = D;
    table.counts.assign(table.n_types * D, 0);
    table.totals.assign(table.n_types * D, 0);
    table.global_counts.assign(D, 0);
    table.global_totals.assign(D, 0);
    table.type_of = data.type_of;
    table.unknown_type = data.unknown_type();
    table.smoothing = smoothing;

    const BinaryMatrix X = data.to_matrix();
    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t base = data.type_of[n] * D;
        for (std::size_t d = 0; d < D; ++d) {
            if (!mask.empty() && mask.contains(n, d)) continue;
            const bool x = X.test(n, d);
            ++table.totals[base + d];
            ++table.global_totals[d];
            if (x) {
                ++table.counts[base + d];
                ++table.global_counts[d];
            }
        }
    }
    return table;
}

double predict_baseline_type(const TypeFrequencyTable& table, std::size_t type, std::size_t d) {
    if (d >= table.n_attributes) throw BoundsError("baseline: attribute out of range");
    if (type >= table.n_types || type == table.unknown_type) {
        return smoothed(table.global_counts[d], table.global_totals[d], table.smoothing);
    }
    const std::size_t i = type * table.n_attributes + d;
    return smoothed(table.counts[i], table.totals[i], table.smoothing);
}

double predict_baseline(const TypeFrequencyTable& table, std::size_t n, std::size_t d) {
    if (n >= table.type_of.size()) throw BoundsError("baseline: object out of range");
    return predict_baseline_type(table, table.type_of[n], d);
}

} // namespace maxmachine
