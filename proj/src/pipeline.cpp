#include "maxmachine/pipeline.hpp"

#include "maxmachine/errors.hpp"

namespace maxmachine {

TripletDataset prepare_dataset(const TripletDataset& data, const RunConfig& cfg) {
    TripletDataset out = filter_min_attr_freq(data, cfg.min_attr_freq);
    if (cfg.per_type_cap > 0) out = per_type_subsample(out, cfg.per_type_cap, cfg.gibbs.seed);
    return out;
}

TrainResult train(const TripletDataset& data, const RunConfig& cfg, const HoldoutMask& mask) {
    cfg.validate();
    data.validate();
    const BinaryMatrix X = data.to_matrix();
    TrainResult r;
    if (cfg.hierarchical) {
        r.model = HierarchicalModel::two_layer(data.n_attributes(), cfg.dims,
                                               TypeClamp::from_types(data.type_of, data.n_types()),
                                               cfg.priors, cfg.type_priors);
    } else {
        r.model = HierarchicalModel::single(data.n_objects(), data.n_attributes(), cfg.dims, cfg.priors);
    }
    r.trace = run(r.model, X, mask, cfg.gibbs);
    return r;
}

EvaluationRun run_evaluation(const TripletDataset& data, const RunConfig& cfg, const ClusterMap* clusters) {
    EvaluationRun ev;
    ev.mask = make_holdout(data.n_objects(), data.n_attributes(), cfg.holdout_fraction, cfg.gibbs.seed);
    ev.result = train(data, cfg, ev.mask);
    ev.baseline = fit_baseline(data, ev.mask, cfg.baseline_smoothing);
    ev.report = evaluate(ev.result.trace, ev.baseline, data.to_matrix(), ev.mask, clusters);
    return ev;
}

} // namespace maxmachine
