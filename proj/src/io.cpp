#include "maxmachine/io.hpp"

#include "maxmachine/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace maxmachine {

using nlohmann::json;

namespace {

json matrix_to_json(const BinaryMatrix& m) {
    json rows = json::array();
    char buf[17];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::string hex;
        hex.reserve(m.words_per_row() * 16);
        for (auto w : m.row(i)) {
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
            hex += buf;
        }
        rows.push_back(std::move(hex));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"bits", std::move(rows)}};
}

BinaryMatrix matrix_from_json(const json& j) {
    BinaryMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto& rows = j.at("bits");
    if (rows.size() != m.rows()) throw ParseError("matrix row count mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto& hex = rows[i].get_ref<const std::string&>();
        if (hex.size() != m.words_per_row() * 16) throw ParseError("matrix row has wrong length");
        auto row = m.row(i);
        for (std::size_t w = 0; w < row.size(); ++w) {
            row[w] = std::stoull(hex.substr(w * 16, 16), nullptr, 16);
        }
        // Padding bits must stay zero.
        if (m.cols() % 64 != 0 && !row.empty()) {
            row.back() &= (BinaryMatrix::word_type{1} << (m.cols() % 64)) - 1;
        }
    }
    return m;
}

json sample_to_json(const PosteriorSample& s) {
    json layers = json::array();
    for (const auto& layer : s.layers) {
        layers.push_back({{"U", matrix_to_json(layer.U)},
                          {"Z", matrix_to_json(layer.Z)},
                          {"reliabilities", layer.reliabilities}});
    }
    return layers;
}

PosteriorSample sample_from_json(const json& j) {
    PosteriorSample s;
    for (const auto& layer : j) {
        s.layers.push_back({matrix_from_json(layer.at("U")), matrix_from_json(layer.at("Z")),
                            layer.at("reliabilities").get<std::vector<double>>()});
    }
    return s;
}

json dataset_to_json(const TripletDataset& d) {
    json pairs = json::array();
    for (const auto& [n, a] : d.pairs) pairs.push_back({n, a});
    return {{"object_ids", d.object_ids},
            {"attribute_ids", d.attribute_ids},
            {"type_names", d.type_names},
            {"type_of", d.type_of},
            {"pairs", std::move(pairs)}};
}

TripletDataset dataset_from_json(const json& j) {
    TripletDataset d;
    d.object_ids = j.at("object_ids").get<std::vector<std::string>>();
    d.attribute_ids = j.at("attribute_ids").get<std::vector<std::string>>();
    d.type_names = j.at("type_names").get<std::vector<std::string>>();
    d.type_of = j.at("type_of").get<std::vector<std::uint32_t>>();
    for (const auto& p : j.at("pairs")) d.pairs.emplace_back(p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>());
    d.validate();
    return d;
}

} // namespace

ModelArtifact make_artifact(const PosteriorTrace& trace, const TripletDataset& data,
                            const std::string& config_text, bool keep_samples, const HoldoutMask* mask) {
    if (trace.empty()) throw StateError("cannot build a model artifact from an empty trace");
    ModelArtifact m;
    m.config_text = config_text;
    m.data = data;
    m.converged = trace.converged;
    m.sweeps = trace.sweep_count;
    const LayerState& first = trace.samples.front().layers.front();
    const std::size_t N = first.Z.rows();
    const std::size_t L = first.U.rows();
    const std::size_t D = first.U.cols();
    m.n_dims = L;
    const bool upper = trace.samples.front().layers.size() > 1;
    m.n_types = upper ? trace.samples.front().layers[1].U.rows() : 0;
    m.mean_u.assign(L * D, 0.0);
    m.mean_z.assign(N * L, 0.0);
    if (upper) m.mean_v.assign(m.n_types * L, 0.0);
    const double S = static_cast<double>(trace.samples.size());
    for (const auto& s : trace.samples) {
        const LayerState& lower = s.layers.front();
        for (std::size_t l = 0; l < L; ++l) lower.U.for_each_in_row(l, [&](std::size_t d) { m.mean_u[l * D + d] += 1.0 / S; });
        for (std::size_t n = 0; n < N; ++n) lower.Z.for_each_in_row(n, [&](std::size_t l) { m.mean_z[n * L + l] += 1.0 / S; });
        m.reliabilities.push_back(lower.reliabilities);
        if (upper) {
            const LayerState& top = s.layers[1];
            for (std::size_t t = 0; t < m.n_types; ++t) {
                top.U.for_each_in_row(t, [&](std::size_t l) { m.mean_v[t * L + l] += 1.0 / S; });
            }
            m.type_reliabilities.push_back(top.reliabilities);
        }
    }
    m.stats = dimension_stats(trace, data.to_matrix(), mask);
    if (keep_samples) m.samples = trace.samples;
    return m;
}

std::string serialize_model(const ModelArtifact& m) {
    json j;
    j["format_version"] = m.format_version;
    j["config"] = m.config_text;
    j["data"] = dataset_to_json(m.data);
    j["n_dims"] = m.n_dims;
    j["n_types"] = m.n_types;
    j["mean_u"] = m.mean_u;
    j["mean_z"] = m.mean_z;
    j["mean_v"] = m.mean_v;
    j["reliabilities"] = m.reliabilities;
    j["type_reliabilities"] = m.type_reliabilities;
    json stats = json::array();
    for (const auto& s : m.stats) stats.push_back({{"nu", s.nu}, {"lambda_hat", s.lambda_hat}, {"cardinality", s.cardinality}});
    j["stats"] = std::move(stats);
    j["converged"] = m.converged;
    j["sweeps"] = m.sweeps;
    if (m.samples) {
        json samples = json::array();
        for (const auto& s : *m.samples) samples.push_back(sample_to_json(s));
        j["samples"] = std::move(samples);
    }
    return j.dump();
}

ModelArtifact deserialize_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != ModelArtifact::kFormatVersion) {
            throw UnsupportedVersionError("model format version " + std::to_string(version) +
                                          " is not supported (expected " +
                                          std::to_string(ModelArtifact::kFormatVersion) + ")");
        }
        ModelArtifact m;
        m.format_version = version;
        m.config_text = j.at("config").get<std::string>();
        m.data = dataset_from_json(j.at("data"));
        m.n_dims = j.at("n_dims").get<std::size_t>();
        m.n_types = j.at("n_types").get<std::size_t>();
        m.mean_u = j.at("mean_u").get<std::vector<double>>();
        m.mean_z = j.at("mean_z").get<std::vector<double>>();
        m.mean_v = j.at("mean_v").get<std::vector<double>>();
        m.reliabilities = j.at("reliabilities").get<std::vector<std::vector<double>>>();
        m.type_reliabilities = j.at("type_reliabilities").get<std::vector<std::vector<double>>>();
        for (const auto& s : j.at("stats")) {
            m.stats.push_back({s.at("nu").get<double>(), s.at("lambda_hat").get<double>(),
                               s.at("cardinality").get<double>()});
        }
        m.converged = j.at("converged").get<bool>();
        m.sweeps = j.at("sweeps").get<std::size_t>();
        if (j.contains("samples")) {
            std::vector<PosteriorSample> samples;
            for (const auto& s : j["samples"]) samples.push_back(sample_from_json(s));
            m.samples = std::move(samples);
        }
        const std::size_t N = m.data.n_objects();
        const std::size_t D = m.data.n_attributes();
        if (m.mean_u.size() != m.n_dims * D || m.mean_z.size() != N * m.n_dims ||
            m.mean_v.size() != m.n_types * m.n_dims || m.reliabilities.empty()) {
            throw ParseError("model file: matrix shapes disagree with the dictionaries");
        }
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file is incomplete: ") + e.what());
    } catch (const DataError& e) {
        throw ParseError(std::string("model file has inconsistent data: ") + e.what());
    }
}

void save_model(const ModelArtifact& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out << serialize_model(model);
    if (!out) throw DataError("failed writing model file '" + path + "'");
}

ModelArtifact load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

PosteriorTrace artifact_trace(const ModelArtifact& model, bool* used_fallback) {
    PosteriorTrace trace;
    trace.converged = model.converged;
    trace.sweep_count = model.sweeps;
    if (model.samples && !model.samples->empty()) {
        trace.samples = *model.samples;
        if (used_fallback) *used_fallback = false;
        return trace;
    }
    const std::size_t N = model.data.n_objects();
    const std::size_t D = model.data.n_attributes();
    const std::size_t L = model.n_dims;
    LayerState state;
    state.U = BinaryMatrix(L, D);
    state.Z = BinaryMatrix(N, L);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t d = 0; d < D; ++d) state.U.assign(l, d, model.mean_u[l * D + d] > 0.5);
    }
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t l = 0; l < L; ++l) state.Z.assign(n, l, model.mean_z[n * L + l] > 0.5);
    }
    state.reliabilities.assign(L + 1, 0.0);
    for (const auto& r : model.reliabilities) {
        for (std::size_t l = 0; l <= L; ++l) state.reliabilities[l] += r[l] / static_cast<double>(model.reliabilities.size());
    }
    trace.samples.push_back(PosteriorSample{{std::move(state)}});
    if (used_fallback) *used_fallback = true;
    return trace;
}

} // namespace maxmachine
