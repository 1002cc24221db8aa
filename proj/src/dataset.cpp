#include "maxmachine/dataset.hpp"

#include "maxmachine/errors.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <unordered_map>

namespace maxmachine {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Dictionary {
  public:
    std::uint32_t intern(const std::string& key, std::vector<std::string>& names) {
        auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(names.size()));
        if (inserted) names.push_back(key);
        return it->second;
    }
    const std::uint32_t* find(const std::string& key) const {
        auto it = index_.find(key);
        return it == index_.end() ? nullptr : &it->second;
    }

  private:
    std::unordered_map<std::string, std::uint32_t> index_;
};

void sort_unique_pairs(TripletDataset& data) {
    auto& p = data.pairs;
    std::sort(p.begin(), p.end());
    const auto before = p.size();
    p.erase(std::unique(p.begin(), p.end()), p.end());
    data.duplicates_dropped += before - p.size();
}

} // namespace

std::pair<std::string, std::string> split_csv_pair(const std::string& line, std::size_t line_no,
                                                   const std::string& source) {
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        throw ParseError(source + " line " + std::to_string(line_no) + ": expected two comma-separated fields");
    }
    auto a = trim(line.substr(0, comma));
    auto b = trim(line.substr(comma + 1));
    if (a.empty() || b.empty()) {
        throw ParseError(source + " line " + std::to_string(line_no) + ": empty field");
    }
    return {std::move(a), std::move(b)};
}

BinaryMatrix TripletDataset::to_matrix() const {
    BinaryMatrix X(n_objects(), n_attributes());
    for (const auto& [n, d] : pairs) X.assign(n, d, true);
    return X;
}

std::size_t TripletDataset::unknown_type() const noexcept {
    const auto it = std::find(type_names.begin(), type_names.end(), kUnknownType);
    return static_cast<std::size_t>(it - type_names.begin());
}

std::size_t TripletDataset::attribute_index(const std::string& id) const {
    const auto it = std::find(attribute_ids.begin(), attribute_ids.end(), id);
    if (it == attribute_ids.end()) throw LookupError("unknown attribute '" + id + "'");
    return static_cast<std::size_t>(it - attribute_ids.begin());
}

std::size_t TripletDataset::object_index(const std::string& id) const {
    const auto it = std::find(object_ids.begin(), object_ids.end(), id);
    if (it == object_ids.end()) throw LookupError("unknown object '" + id + "'");
    return static_cast<std::size_t>(it - object_ids.begin());
}

void TripletDataset::validate() const {
    if (type_of.size() != n_objects()) throw DataError("every object needs a type label");
    for (auto t : type_of) {
        if (t >= n_types()) throw DataError("type index out of range");
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first >= n_objects() || pairs[i].second >= n_attributes()) {
            throw DataError("pair index out of range");
        }
        if (i > 0 && !(pairs[i - 1] < pairs[i])) throw DataError("pairs must be sorted and unique");
    }
}

TripletDataset read_triplets(std::istream& pairs_in, std::istream& types_in) {
    TripletDataset data;
    Dictionary objects;
    Dictionary attributes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(pairs_in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto [obj, attr] = split_csv_pair(line, line_no, "pairs");
        const auto n = objects.intern(obj, data.object_ids);
        const auto d = attributes.intern(attr, data.attribute_ids);
        data.pairs.emplace_back(n, d);
    }
    if (data.pairs.empty()) throw DataError("pairs file contains no pairs");

    Dictionary types;
    std::vector<std::int64_t> assigned;
    line_no = 0;
    while (std::getline(types_in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto [obj, type] = split_csv_pair(line, line_no, "types");
        const auto n = objects.intern(obj, data.object_ids);
        const auto t = types.intern(type, data.type_names);
        if (assigned.size() <= n) assigned.resize(n + 1, -1);
        if (assigned[n] >= 0 && assigned[n] != static_cast<std::int64_t>(t)) {
            throw ParseError("types line " + std::to_string(line_no) + ": object '" + obj + "' already has a different type");
        }
        assigned[n] = t;
    }
    assigned.resize(data.n_objects(), -1);
    data.type_of.resize(data.n_objects());
    for (std::size_t n = 0; n < data.n_objects(); ++n) {
        data.type_of[n] = assigned[n] >= 0 ? static_cast<std::uint32_t>(assigned[n])
                                           : types.intern(kUnknownType, data.type_names);
    }
    sort_unique_pairs(data);
    return data;
}

TripletDataset load_triplets(const std::string& pairs_path, const std::string& types_path) {
    std::ifstream pairs(pairs_path);
    if (!pairs) throw DataError("cannot open pairs file '" + pairs_path + "'");
    std::ifstream types(types_path);
    if (!types) throw DataError("cannot open types file '" + types_path + "'");
    return read_triplets(pairs, types);
}

void write_triplets(const TripletDataset& data, std::ostream& pairs, std::ostream& types) {
    for (const auto& [n, d] : data.pairs) pairs << data.object_ids[n] << ',' << data.attribute_ids[d] << '\n';
    for (std::size_t n = 0; n < data.n_objects(); ++n) {
        types << data.object_ids[n] << ',' << data.type_names[data.type_of[n]] << '\n';
    }
}

namespace {

TripletDataset keep_objects(const TripletDataset& data, const std::vector<bool>& keep) {
    TripletDataset out;
    out.attribute_ids = data.attribute_ids;
    out.type_names = data.type_names;
    std::vector<std::int64_t> remap(data.n_objects(), -1);
    for (std::size_t n = 0; n < data.n_objects(); ++n) {
        if (!keep[n]) continue;
        remap[n] = static_cast<std::int64_t>(out.object_ids.size());
        out.object_ids.push_back(data.object_ids[n]);
        out.type_of.push_back(data.type_of[n]);
    }
    for (const auto& [n, d] : data.pairs) {
        if (remap[n] >= 0) out.pairs.emplace_back(static_cast<std::uint32_t>(remap[n]), d);
    }
    return out;
}

} // namespace

TripletDataset per_type_subsample(const TripletDataset& data, std::size_t cap, std::uint64_t seed) {
    if (cap < 1) throw ConfigError("per-type cap must be at least 1");
    std::vector<std::vector<std::size_t>> members(data.n_types());
    for (std::size_t n = 0; n < data.n_objects(); ++n) members[data.type_of[n]].push_back(n);
    std::vector<bool> keep(data.n_objects(), false);
    std::mt19937_64 rng(seed);
    for (const auto& group : members) {
        if (group.size() <= cap) {
            for (auto n : group) keep[n] = true;
            continue;
        }
        std::vector<std::size_t> chosen;
        std::sample(group.begin(), group.end(), std::back_inserter(chosen), cap, rng);
        for (auto n : chosen) keep[n] = true;
    }
    return keep_objects(data, keep);
}

TripletDataset filter_min_attr_freq(const TripletDataset& data, double min_freq) {
    if (min_freq <= 0.0) return data;
    std::vector<std::size_t> freq(data.n_attributes(), 0);
    for (const auto& p : data.pairs) ++freq[p.second];
    TripletDataset out;
    out.object_ids = data.object_ids;
    out.type_names = data.type_names;
    out.type_of = data.type_of;
    std::vector<std::int64_t> remap(data.n_attributes(), -1);
    const double threshold = min_freq * static_cast<double>(data.n_objects());
    for (std::size_t d = 0; d < data.n_attributes(); ++d) {
        if (static_cast<double>(freq[d]) < threshold) continue;
        remap[d] = static_cast<std::int64_t>(out.attribute_ids.size());
        out.attribute_ids.push_back(data.attribute_ids[d]);
    }
    for (const auto& [n, d] : data.pairs) {
        if (remap[d] >= 0) out.pairs.emplace_back(n, static_cast<std::uint32_t>(remap[d]));
    }
    return out;
}

TripletDataset dataset_from_matrix(const BinaryMatrix& X, const std::vector<std::uint32_t>& type_of,
                                   std::size_t n_types) {
    if (type_of.size() != X.rows()) throw ShapeError("one type label per object required");
    TripletDataset data;
    for (std::size_t n = 0; n < X.rows(); ++n) data.object_ids.push_back("o" + std::to_string(n));
    for (std::size_t d = 0; d < X.cols(); ++d) data.attribute_ids.push_back("a" + std::to_string(d));
    for (std::size_t t = 0; t < n_types; ++t) data.type_names.push_back("t" + std::to_string(t));
    data.type_of = type_of;
    for (std::size_t n = 0; n < X.rows(); ++n) {
        X.for_each_in_row(n, [&](std::size_t d) {
            data.pairs.emplace_back(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d));
        });
    }
    data.validate();
    return data;
}

} // namespace maxmachine
