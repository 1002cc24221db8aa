#include "maxmachine/config.hpp"
#include "maxmachine/dataset.hpp"
#include "maxmachine/errors.hpp"
#include "maxmachine/eval.hpp"
#include "maxmachine/io.hpp"
#include "maxmachine/oracle.hpp"
#include "maxmachine/pipeline.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
namespace mm = maxmachine;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

mm::TripletDataset to_dataset(const Pairs& pairs, const Pairs& types) {
    std::ostringstream p, t;
    for (const auto& [a, b] : pairs) p << a << ',' << b << '\n';
    for (const auto& [a, b] : types) t << a << ',' << b << '\n';
    std::istringstream pi(p.str()), ti(t.str());
    return mm::read_triplets(pi, ti);
}

Pairs dataset_pairs(const mm::TripletDataset& data) {
    Pairs out;
    out.reserve(data.pairs.size());
    for (const auto& [n, d] : data.pairs) out.emplace_back(data.object_ids[n], data.attribute_ids[d]);
    return out;
}

Pairs dataset_types(const mm::TripletDataset& data) {
    Pairs out;
    for (std::size_t n = 0; n < data.n_objects(); ++n) {
        out.emplace_back(data.object_ids[n], data.type_names[data.type_of[n]]);
    }
    return out;
}

mm::RunConfig make_config(const std::string& text, std::optional<std::size_t> dims,
                          std::optional<std::uint64_t> seed) {
    std::istringstream in(text);
    mm::RunConfig cfg = mm::parse_config(in);
    if (dims) cfg.dims = *dims;
    if (seed) cfg.gibbs.seed = *seed;
    cfg.validate();
    return cfg;
}

class Model {
  public:
    explicit Model(mm::ModelArtifact artifact) : artifact_(std::move(artifact)) {
        trace_ = mm::artifact_trace(artifact_);
    }

    static Model train(const Pairs& pairs, const Pairs& types, const std::string& config,
                       std::optional<std::size_t> dims, std::optional<std::uint64_t> seed) {
        const mm::RunConfig cfg = make_config(config, dims, seed);
        const auto data = mm::prepare_dataset(to_dataset(pairs, types), cfg);
        mm::TrainResult result;
        {
            py::gil_scoped_release release;
            result = mm::train(data, cfg, mm::HoldoutMask(data.n_objects(), data.n_attributes()));
        }
        return Model(mm::make_artifact(result.trace, data, mm::to_text(cfg), cfg.save_samples));
    }

    static Model load(const std::string& path) { return Model(mm::load_model(path)); }
    void save(const std::string& path) const { mm::save_model(artifact_, path); }

    double predict(const std::string& object, const std::string& attribute) const {
        const mm::Cell cell{artifact_.data.object_index(object), artifact_.data.attribute_index(attribute)};
        return mm::posterior_predictive(trace_, std::span<const mm::Cell>(&cell, 1))[0];
    }

    py::array_t<double> predict_all() const {
        const auto p = mm::posterior_predictive_all(trace_);
        py::array_t<double> out({artifact_.data.n_objects(), artifact_.data.n_attributes()});
        std::copy(p.begin(), p.end(), out.mutable_data());
        return out;
    }

    py::array_t<double> codes() const {
        const std::size_t L = artifact_.n_dims, D = artifact_.data.n_attributes();
        py::array_t<double> out({L, D});
        std::copy(artifact_.mean_u.begin(), artifact_.mean_u.end(), out.mutable_data());
        return out;
    }

    const mm::ModelArtifact& artifact() const { return artifact_; }

  private:
    mm::ModelArtifact artifact_;
    mm::PosteriorTrace trace_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MaxMachine binary latent feature model";

    py::register_exception<mm::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<mm::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<mm::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<mm::DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<mm::LookupError>(m, "LookupError", PyExc_KeyError);

    py::class_<Model>(m, "Model")
        .def_static("train", &Model::train, py::arg("pairs"), py::arg("types") = Pairs{},
                    py::arg("config") = std::string{}, py::arg("dims") = py::none(), py::arg("seed") = py::none(),
                    "Fit the model to (object, attribute) pairs and (object, type) labels.")
        .def_static("load", &Model::load, py::arg("path"))
        .def("save", &Model::save, py::arg("path"))
        .def("predict", &Model::predict, py::arg("object"), py::arg("attribute"))
        .def("predict_all", &Model::predict_all, "N×D posterior predictive probabilities")
        .def("codes", &Model::codes, "L×D posterior mean of the codes")
        .def_property_readonly("object_ids", [](const Model& s) { return s.artifact().data.object_ids; })
        .def_property_readonly("attribute_ids", [](const Model& s) { return s.artifact().data.attribute_ids; })
        .def_property_readonly("n_dims", [](const Model& s) { return s.artifact().n_dims; })
        .def_property_readonly("converged", [](const Model& s) { return s.artifact().converged; })
        .def_property_readonly("sweeps", [](const Model& s) { return s.artifact().sweeps; });

    m.def(
        "simulate",
        [](const std::string& config, std::optional<std::uint64_t> seed) {
            const mm::RunConfig cfg = make_config(config, std::nullopt, std::nullopt);
            mm::SynthConfig synth = cfg.synth;
            if (seed) synth.seed = *seed;
            const auto sim = mm::generate(synth);
            return py::make_tuple(dataset_pairs(sim.data), dataset_types(sim.data));
        },
        py::arg("config") = std::string{}, py::arg("seed") = py::none(),
        "Planted dataset as (pairs, types); `config` uses the same keys as the CLI config file.");

    m.def(
        "evaluate",
        [](const Pairs& pairs, const Pairs& types, const std::string& config, std::optional<std::size_t> dims,
           std::optional<std::uint64_t> seed) {
            const mm::RunConfig cfg = make_config(config, dims, seed);
            const auto data = mm::prepare_dataset(to_dataset(pairs, types), cfg);
            mm::EvaluationRun run;
            {
                py::gil_scoped_release release;
                run = mm::run_evaluation(data, cfg);
            }
            py::dict out;
            out["auc_model"] = run.report.auc_model;
            out["auc_baseline"] = run.report.auc_baseline;
            out["n_test_cells"] = run.report.n_test_cells;
            return out;
        },
        py::arg("pairs"), py::arg("types") = Pairs{}, py::arg("config") = std::string{},
        py::arg("dims") = py::none(), py::arg("seed") = py::none(),
        "Holdout ROC-AUC of the model and of the type-frequency baseline.");

    m.def(
        "roc_auc",
        [](const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
            return mm::roc_auc(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
}
