#include "maxmachine/hierarchy.hpp"

#include "maxmachine/errors.hpp"

#include <string>

namespace maxmachine {

TypeClamp TypeClamp::from_types(std::vector<std::uint32_t> type_of, std::size_t n_types) {
    if (n_types == 0) throw ConfigError("at least one type is required");
    TypeClamp tc;
    tc.n_types = n_types;
    tc.one_hot = BinaryMatrix(type_of.size(), n_types);
    for (std::size_t n = 0; n < type_of.size(); ++n) {
        if (type_of[n] >= n_types) {
            throw ConfigError("object " + std::to_string(n) + " has type " + std::to_string(type_of[n]) +
                              " but only " + std::to_string(n_types) + " types exist");
        }
        tc.one_hot.assign(n, type_of[n], true);
    }
    tc.type_of = std::move(type_of);
    return tc;
}

HierarchicalModel HierarchicalModel::single(std::size_t n_objects, std::size_t n_attributes,
                                            std::size_t n_dims, const PriorConfig& priors) {
    HierarchicalModel m;
    m.layer1 = FactorLayer::zeros(n_objects, n_attributes, n_dims, priors);
    return m;
}

HierarchicalModel HierarchicalModel::two_layer(std::size_t n_attributes, std::size_t n_dims,
                                               TypeClamp types, const PriorConfig& priors1,
                                               const PriorConfig& priors2) {
    HierarchicalModel m;
    const std::size_t N = types.type_of.size();
    m.layer1 = FactorLayer::zeros(N, n_attributes, n_dims, priors1);
    FactorLayer upper = FactorLayer::zeros(N, n_dims, types.n_types, priors2);
    upper.Z = types.one_hot;
    upper.clamp_z.fill(true);
    m.layer2 = std::move(upper);
    m.types = std::move(types);
    return m;
}

void HierarchicalModel::validate() const {
    layer1.validate();
    if (!layer2) return;
    layer2->validate();
    if (layer2->n_objects() != layer1.n_objects() || layer2->n_attributes() != layer1.n_dims()) {
        throw ShapeError("layer 2 must model the N×L assignment matrix of layer 1");
    }
    if (types && !(layer2->Z == types->one_hot)) throw ContractError("layer 2 object factor differs from the type encoding");
}

double prior_logit_from_above(const HierarchicalModel& model, std::size_t n, std::size_t l) {
    if (n >= model.layer1.n_objects() || l >= model.layer1.n_dims()) {
        throw BoundsError("prior_logit_from_above: index out of range");
    }
    if (!model.layer2) return logit(model.layer1.priors.q_z);
    return logit(point_prob(*model.layer2, n, l));
}

ZPriorLogits z_prior_from_above(const HierarchicalModel& model) {
    if (!model.layer2) return ZPriorLogits::uniform(logit(model.layer1.priors.q_z));
    const FactorLayer& upper = *model.layer2;
    const ActiveIndex index(upper);
    const std::size_t N = model.layer1.n_objects();
    const std::size_t L = model.layer1.n_dims();
    std::vector<double> table(N * L);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t l = 0; l < L; ++l) table[n * L + l] = logit(index.prob(n, l));
    }
    return ZPriorLogits::dense(N, L, std::move(table));
}

HierarchicalSampler::HierarchicalSampler(HierarchicalModel& model, const BinaryMatrix& X,
                                         const HoldoutMask& mask)
    : model_(&model), lower_((model.validate(), model.layer1), X, mask) {
    if (model.layer2) {
        upper_mask_ = HoldoutMask(model.layer1.n_objects(), model.layer1.n_dims());
        upper_.emplace(*model.layer2, model.layer1.Z, upper_mask_);
    }
}

ZPriorLogits HierarchicalSampler::prior_table() const { return z_prior_from_above(*model_); }

void HierarchicalSampler::joint_sweep(Rng& rng, const SweepOptions& opts, bool update_reliabilities) {
    lower_.sweep(model_->layer1, rng, prior_table(), opts);
    if (upper_) {
        upper_->data_changed();
        SweepOptions upper_opts = opts;
        upper_opts.stream_seed = detail::substream_seed(opts.stream_seed, 0, 0xFFFF, 1);
        upper_->sweep(*model_->layer2, rng, ZPriorLogits::uniform(logit(model_->layer2->priors.q_z)),
                      upper_opts);
    }
    if (update_reliabilities) {
        lower_.update_reliabilities(model_->layer1);
        if (upper_) upper_->update_reliabilities(*model_->layer2);
    }
}

PosteriorSample HierarchicalSampler::snapshot() const {
    PosteriorSample s;
    s.layers.push_back(model_->layer1.state());
    if (model_->layer2) s.layers.push_back(model_->layer2->state());
    return s;
}

void joint_sweep(HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask, Rng& rng) {
    HierarchicalSampler sampler(model, X, mask);
    sampler.joint_sweep(rng);
}

PosteriorTrace run(HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask,
                   const GibbsConfig& config) {
    config.validate();
    model.validate();
    if (!model.layer2) return run(model.layer1, X, mask, config);
    Rng rng(config.seed);
    if (config.initialize) {
        initialize_layer(model.layer1, rng, config.init_reliability);
        initialize_layer(*model.layer2, rng, config.init_reliability);
    }
    HierarchicalSampler sampler(model, X, mask);
    SweepOptions opts;
    opts.parallel = config.parallel;
    opts.threads = config.threads;
    opts.stream_seed = config.seed;
    std::size_t sweep_index = 0;
    auto step = [&]() {
        opts.sweep_index = sweep_index++;
        sampler.joint_sweep(rng, opts, config.update_reliabilities);
        return sampler.log_likelihood();
    };
    auto snapshot = [&]() { return sampler.snapshot(); };
    return detail::drive_chain(config, step, snapshot);
}

namespace {

FactorLayer& target_layer(HierarchicalModel& model, std::size_t layer) {
    if (layer == 0) return model.layer1;
    if (layer == 1 && model.layer2) return *model.layer2;
    throw BoundsError("clamp: layer " + std::to_string(layer) + " does not exist");
}

} // namespace

void clamp(HierarchicalModel& model, const ClampTarget& target, std::span<const std::uint8_t> values) {
    if (values.size() != target.entries.size()) throw ShapeError("clamp: one value per entry required");
    FactorLayer& layer = target_layer(model, target.layer);
    BinaryMatrix& factor = target.matrix == FactorKind::U ? layer.U : layer.Z;
    BinaryMatrix& flags = target.matrix == FactorKind::U ? layer.clamp_u : layer.clamp_z;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Cell c = target.entries[i];
        if (values[i] > 1) throw ContractError("clamp: values must be 0 or 1");
        if (target.layer == 1 && target.matrix == FactorKind::Z && model.types &&
            values[i] != static_cast<std::uint8_t>(model.types->one_hot.get(c.n, c.d))) {
            throw ContractError("clamp: the type encoding of layer 2 cannot be changed");
        }
        factor.set(c.n, c.d, values[i] != 0);
        flags.set(c.n, c.d, true);
    }
}

void unclamp(HierarchicalModel& model, const ClampTarget& target) {
    if (target.layer == 1 && target.matrix == FactorKind::Z && model.types) {
        throw ContractError("unclamp: the one-hot type factor of layer 2 is always clamped");
    }
    FactorLayer& layer = target_layer(model, target.layer);
    BinaryMatrix& flags = target.matrix == FactorKind::U ? layer.clamp_u : layer.clamp_z;
    for (const Cell& c : target.entries) flags.set(c.n, c.d, false);
}

} // namespace maxmachine
