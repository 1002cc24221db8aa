#pragma once

#include "maxmachine/binmat.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace maxmachine {

inline constexpr const char* kUnknownType = "<unknown>";

/// Sparse (object, attribute) applicability pairs with id dictionaries and type labels.
struct TripletDataset {
    std::vector<std::string> object_ids;
    std::vector<std::string> attribute_ids;
    std::vector<std::string> type_names;
    std::vector<std::uint32_t> type_of; ///< object -> index into type_names
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs; ///< sorted, unique
    std::size_t duplicates_dropped = 0;

    std::size_t n_objects() const noexcept { return object_ids.size(); }
    std::size_t n_attributes() const noexcept { return attribute_ids.size(); }
    std::size_t n_types() const noexcept { return type_names.size(); }

    BinaryMatrix to_matrix() const;
    /// Index of kUnknownType in type_names, or n_types() if absent.
    std::size_t unknown_type() const noexcept;
    /// Throws LookupError for an unknown id.
    std::size_t attribute_index(const std::string& id) const;
    std::size_t object_index(const std::string& id) const;

    /// Throws DataError when the invariants do not hold.
    void validate() const;

    friend bool operator==(const TripletDataset&, const TripletDataset&) = default;
};

/**
 * Reads headerless `object_id,attribute_id` and `object_id,type` CSV streams.
 *
 * Objects and attributes are indexed in first-appearance order (pairs file
 * first, then objects that only occur in the types file). Duplicate pairs are
 * dropped and counted. Objects without a type get kUnknownType.
 * Throws ParseError (with the line number) on malformed rows and DataError on
 * an empty pairs file.
 */
TripletDataset read_triplets(std::istream& pairs, std::istream& types);
TripletDataset load_triplets(const std::string& pairs_path, const std::string& types_path);

void write_triplets(const TripletDataset& data, std::ostream& pairs, std::ostream& types);

/// Keeps at most `cap` objects per type, uniformly without replacement; indices re-densified.
TripletDataset per_type_subsample(const TripletDataset& data, std::size_t cap, std::uint64_t seed);

/// Drops attributes applied to fewer than `min_freq` (fraction) of the objects.
TripletDataset filter_min_attr_freq(const TripletDataset& data, double min_freq);

/// Dataset from a dense matrix with generated ids (o<n>, a<d>, t<k>).
TripletDataset dataset_from_matrix(const BinaryMatrix& X, const std::vector<std::uint32_t>& type_of,
                                   std::size_t n_types);

/// Splits a headerless two-column CSV line; throws ParseError naming `line_no`.
std::pair<std::string, std::string> split_csv_pair(const std::string& line, std::size_t line_no,
                                                   const std::string& source);

} // namespace maxmachine
