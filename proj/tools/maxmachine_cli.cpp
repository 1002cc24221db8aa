// Command-line front end: train, predict, evaluate, simulate, report.

#include "maxmachine/config.hpp"
#include "maxmachine/dataset.hpp"
#include "maxmachine/errors.hpp"
#include "maxmachine/eval.hpp"
#include "maxmachine/io.hpp"
#include "maxmachine/oracle.hpp"
#include "maxmachine/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <unordered_map>

namespace mm = maxmachine;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitState = 4;

struct CommonRun {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::optional<double> min_attr_freq;
    std::optional<std::size_t> per_type_cap;
};

mm::RunConfig resolve_config(const CommonRun& opts) {
    mm::RunConfig cfg = opts.config_path.empty() ? mm::RunConfig{} : mm::load_config(opts.config_path);
    if (opts.seed) {
        cfg.gibbs.seed = *opts.seed;
        cfg.synth.seed = *opts.seed;
    }
    if (opts.threads > 1) {
        cfg.gibbs.parallel = true;
        cfg.gibbs.threads = opts.threads;
    }
    if (opts.min_attr_freq) cfg.min_attr_freq = *opts.min_attr_freq;
    if (opts.per_type_cap) cfg.per_type_cap = *opts.per_type_cap;
    cfg.validate();
    return cfg;
}

/// Output stream: the named file, or stdout when the path is empty.
class Output {
  public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw mm::DataError("cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

mm::ClusterMap load_clusters(const std::string& path, const mm::TripletDataset& data) {
    std::ifstream in(path);
    if (!in) throw mm::DataError("cannot open clusters file '" + path + "'");
    std::unordered_map<std::string, std::size_t> object_index;
    for (std::size_t n = 0; n < data.n_objects(); ++n) object_index.emplace(data.object_ids[n], n);
    mm::ClusterMap map;
    std::unordered_map<std::string, std::uint32_t> cluster_index;
    std::vector<std::int64_t> assigned(data.n_objects(), -1);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto [obj, cluster] = mm::split_csv_pair(line, line_no, path);
        const auto it = object_index.find(obj);
        if (it == object_index.end()) continue;
        auto [cit, inserted] = cluster_index.try_emplace(cluster, static_cast<std::uint32_t>(map.names.size()));
        if (inserted) map.names.push_back(cluster);
        assigned[it->second] = cit->second;
    }
    map.cluster_of.resize(data.n_objects());
    for (std::size_t n = 0; n < data.n_objects(); ++n) {
        if (assigned[n] < 0) {
            auto [cit, inserted] = cluster_index.try_emplace(mm::kUnknownType, static_cast<std::uint32_t>(map.names.size()));
            if (inserted) map.names.push_back(mm::kUnknownType);
            assigned[n] = cit->second;
        }
        map.cluster_of[n] = static_cast<std::uint32_t>(assigned[n]);
    }
    return map;
}

std::vector<mm::Cell> load_cells(const std::string& path, const mm::TripletDataset& data) {
    std::ifstream in(path);
    if (!in) throw mm::DataError("cannot open cells file '" + path + "'");
    std::unordered_map<std::string, std::size_t> objects;
    std::unordered_map<std::string, std::size_t> attributes;
    for (std::size_t n = 0; n < data.n_objects(); ++n) objects.emplace(data.object_ids[n], n);
    for (std::size_t d = 0; d < data.n_attributes(); ++d) attributes.emplace(data.attribute_ids[d], d);
    std::vector<mm::Cell> cells;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto [obj, attr] = mm::split_csv_pair(line, line_no, path);
        const auto o = objects.find(obj);
        if (o == objects.end()) throw mm::LookupError(path + ":" + std::to_string(line_no) + ": unknown object '" + obj + "'");
        const auto a = attributes.find(attr);
        if (a == attributes.end()) throw mm::LookupError(path + ":" + std::to_string(line_no) + ": unknown attribute '" + attr + "'");
        cells.push_back({o->second, a->second});
    }
    return cells;
}

void print_summary(const mm::PosteriorTrace& trace) {
    std::cerr << "sweeps: " << trace.sweep_count << ", converged: " << (trace.converged ? "yes" : "no")
              << ", samples: " << trace.samples.size() << '\n';
}

int cmd_train(const std::string& pairs, const std::string& types, std::optional<std::size_t> dims,
              bool flat, bool no_samples, const std::string& out, const CommonRun& common) {
    mm::RunConfig cfg = resolve_config(common);
    if (dims) cfg.dims = *dims;
    if (flat) cfg.hierarchical = false;
    if (no_samples) cfg.save_samples = false;
    const mm::TripletDataset data = mm::prepare_dataset(mm::load_triplets(pairs, types), cfg);
    if (data.duplicates_dropped > 0) std::cerr << "warning: dropped " << data.duplicates_dropped << " duplicate pairs\n";
    const mm::HoldoutMask none(data.n_objects(), data.n_attributes());
    const mm::TrainResult r = mm::train(data, cfg, none);
    print_summary(r.trace);
    mm::save_model(mm::make_artifact(r.trace, data, mm::to_text(cfg), cfg.save_samples), out);
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& cells_path, bool all, const std::string& out) {
    if (all == !cells_path.empty()) throw mm::ConfigError("predict needs exactly one of --cells or --all");
    const mm::ModelArtifact model = mm::load_model(model_path);
    bool fallback = false;
    const mm::PosteriorTrace trace = mm::artifact_trace(model, &fallback);
    if (fallback) std::cerr << "warning: model has no retained samples; predicting from posterior means\n";
    std::vector<mm::Cell> cells;
    if (all) {
        for (std::size_t n = 0; n < model.data.n_objects(); ++n) {
            for (std::size_t d = 0; d < model.data.n_attributes(); ++d) cells.push_back({n, d});
        }
    } else {
        cells = load_cells(cells_path, model.data);
    }
    const std::vector<double> p = mm::posterior_predictive(trace, cells);
    Output o(out);
    auto& s = o.stream();
    s << std::setprecision(10) << "object_id,attribute_id,p\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        s << model.data.object_ids[cells[i].n] << ',' << model.data.attribute_ids[cells[i].d] << ',' << p[i] << '\n';
    }
    return 0;
}

int cmd_evaluate(const std::string& pairs, const std::string& types, std::optional<double> frac,
                 const std::string& clusters_path, std::optional<std::size_t> dims, const std::string& out,
                 const CommonRun& common) {
    mm::RunConfig cfg = resolve_config(common);
    if (frac) cfg.holdout_fraction = *frac;
    if (dims) cfg.dims = *dims;
    cfg.validate();
    const mm::TripletDataset data = mm::prepare_dataset(mm::load_triplets(pairs, types), cfg);
    std::optional<mm::ClusterMap> clusters;
    if (!clusters_path.empty()) clusters = load_clusters(clusters_path, data);
    const mm::EvaluationRun ev = mm::run_evaluation(data, cfg, clusters ? &*clusters : nullptr);
    print_summary(ev.result.trace);
    std::cerr << "auc_model: " << ev.report.auc_model << ", auc_baseline: " << ev.report.auc_baseline << '\n';
    Output o(out);
    mm::write_report_csv(ev.report, o.stream());
    return 0;
}

int cmd_simulate(const std::string& prefix, const CommonRun& common) {
    const mm::RunConfig cfg = resolve_config(common);
    const mm::SynthResult sim = mm::generate(cfg.synth);
    {
        std::ofstream pairs(prefix + "_pairs.csv");
        std::ofstream types(prefix + "_types.csv");
        if (!pairs || !types) throw mm::DataError("cannot write files with prefix '" + prefix + "'");
        mm::write_triplets(sim.data, pairs, types);
    }
    auto dense_rows = [](const mm::BinaryMatrix& m) {
        std::vector<std::vector<int>> rows(m.rows(), std::vector<int>(m.cols(), 0));
        for (std::size_t i = 0; i < m.rows(); ++i) m.for_each_in_row(i, [&](std::size_t j) { rows[i][j] = 1; });
        return rows;
    };
    nlohmann::json truth = {{"U", dense_rows(sim.U)},
                            {"Z", dense_rows(sim.Z)},
                            {"V", dense_rows(sim.V)},
                            {"reliabilities", sim.reliabilities},
                            {"type_reliabilities", sim.type_reliabilities},
                            {"object_ids", sim.data.object_ids},
                            {"attribute_ids", sim.data.attribute_ids},
                            {"type_names", sim.data.type_names}};
    std::ofstream t(prefix + "_truth.json");
    if (!t) throw mm::DataError("cannot write '" + prefix + "_truth.json'");
    t << truth.dump() << '\n';
    std::cerr << "wrote " << sim.data.pairs.size() << " pairs for " << sim.data.n_objects() << " objects\n";
    return 0;
}

int cmd_report(const std::string& model_path, const std::string& attribute, std::size_t top_k, bool codes,
               const std::string& out) {
    if (codes == !attribute.empty()) throw mm::ConfigError("report needs exactly one of --codes or --attribute");
    const mm::ModelArtifact model = mm::load_model(model_path);
    Output o(out);
    auto& s = o.stream();
    s << std::setprecision(10);
    if (codes) {
        const std::size_t L = model.n_dims;
        const std::size_t D = model.data.n_attributes();
        s << "dim";
        for (const auto& a : model.data.attribute_ids) s << ',' << a;
        s << ",nu,lambda_hat\n";
        for (std::size_t l = 0; l <= L; ++l) {
            s << (l < L ? std::to_string(l) : std::string("clamped"));
            for (std::size_t d = 0; d < D; ++d) s << ',' << (l < L ? model.mean_u[l * D + d] : 1.0);
            s << ',' << model.stats[l].nu << ',' << model.stats[l].lambda_hat << '\n';
        }
        return 0;
    }
    bool fallback = false;
    const mm::PosteriorTrace trace = mm::artifact_trace(model, &fallback);
    if (fallback) std::cerr << "warning: model has no retained samples; predicting from posterior means\n";
    mm::write_applicability_csv(mm::applicability_report(trace, model.data, attribute, top_k), s);
    return 0;
}

void add_common(CLI::App* cmd, CommonRun& common) {
    cmd->add_option("--config", common.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "seed for every random draw");
    cmd->add_option("--threads", common.threads, "sampler threads (1 = sequential, reproducible)")
        ->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MaxMachine: binary latent feature model for attribute applicability"};
    app.require_subcommand(1);

    CommonRun common;
    std::string pairs, types, out, model_path, cells_path, clusters_path, prefix, attribute;
    std::optional<std::size_t> dims;
    std::optional<double> holdout_frac;
    bool all = false, codes = false, flat = false, no_samples = false;
    std::size_t top_k = 5;

    auto* train = app.add_subcommand("train", "fit the model and write a model file");
    train->add_option("--pairs", pairs, "object_id,attribute_id CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--types", types, "object_id,type CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--dims", dims, "number of latent dimensions L");
    train->add_option("--out", out, "model file to write")->required();
    train->add_option("--min-attr-freq", common.min_attr_freq, "drop attributes applied to fewer objects (fraction)");
    train->add_option("--per-type-cap", common.per_type_cap, "keep at most this many objects per type");
    train->add_flag("--flat", flat, "single layer, no type hierarchy");
    train->add_flag("--no-samples", no_samples, "store posterior means only");
    add_common(train, common);

    auto* predict = app.add_subcommand("predict", "posterior predictive probabilities");
    predict->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--cells", cells_path, "object_id,attribute_id CSV of cells to score")->check(CLI::ExistingFile);
    predict->add_flag("--all", all, "score every cell");
    predict->add_option("--out", out, "output CSV (default stdout)");

    auto* evaluate = app.add_subcommand("evaluate", "holdout ROC-AUC of the model against the type baseline");
    evaluate->add_option("--pairs", pairs, "object_id,attribute_id CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--types", types, "object_id,type CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--holdout-frac", holdout_frac, "fraction of cells held out");
    evaluate->add_option("--clusters", clusters_path, "object_id,cluster CSV")->check(CLI::ExistingFile);
    evaluate->add_option("--dims", dims, "number of latent dimensions L");
    evaluate->add_option("--out", out, "report CSV (default stdout)");
    evaluate->add_option("--min-attr-freq", common.min_attr_freq, "drop attributes applied to fewer objects (fraction)");
    evaluate->add_option("--per-type-cap", common.per_type_cap, "keep at most this many objects per type");
    add_common(evaluate, common);

    auto* simulate = app.add_subcommand("simulate", "write a planted dataset and its ground truth");
    simulate->add_option("--out-prefix", prefix, "writes <P>_pairs.csv, <P>_types.csv, <P>_truth.json")->required();
    add_common(simulate, common);

    auto* report = app.add_subcommand("report", "code matrix or per-type applicability table");
    report->add_option("--model", model_path, "model file")->required()->check(CLI::ExistingFile);
    report->add_option("--attribute", attribute, "attribute id for the applicability table");
    report->add_option("--top-k", top_k, "number of types to list")->check(CLI::PositiveNumber);
    report->add_flag("--codes", codes, "posterior mean of U with nu and lambda_hat");
    report->add_option("--out", out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*train) return cmd_train(pairs, types, dims, flat, no_samples, out, common);
        if (*predict) return cmd_predict(model_path, cells_path, all, out);
        if (*evaluate) return cmd_evaluate(pairs, types, holdout_frac, clusters_path, dims, out, common);
        if (*simulate) return cmd_simulate(prefix, common);
        if (*report) return cmd_report(model_path, attribute, top_k, codes, out);
    } catch (const mm::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const mm::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mm::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mm::LookupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mm::ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mm::BoundsError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const mm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitState;
    }
    return kExitUsage;
}
