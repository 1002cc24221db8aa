#pragma once

#include "maxmachine/binmat.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/model.hpp"
#include "maxmachine/sampler.hpp"
#include "maxmachine/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace maxmachine {

/// One-hot encoding of object types; becomes the fully clamped object factor of layer 2.
struct TypeClamp {
    std::vector<std::uint32_t> type_of;
    std::size_t n_types = 0;
    BinaryMatrix one_hot; // N×T

    /// Throws ConfigError when n_types == 0 or a label is out of range.
    static TypeClamp from_types(std::vector<std::uint32_t> type_of, std::size_t n_types);
};

/**
 * Two stacked MaxMachines.
 *
 * layer1 explains the data X with Z (N×L) and U (L×D). layer2 explains layer1.Z
 * with the clamped one-hot type matrix as its object factor (N×T) and codes
 * V = layer2.U (T×L). Without layer2 the prior on Z is Bernoulli(q_z).
 */
struct HierarchicalModel {
    FactorLayer layer1;
    std::optional<FactorLayer> layer2;
    std::optional<TypeClamp> types;

    static HierarchicalModel single(std::size_t n_objects, std::size_t n_attributes,
                                    std::size_t n_dims, const PriorConfig& priors = {});
    static HierarchicalModel two_layer(std::size_t n_attributes, std::size_t n_dims, TypeClamp types,
                                       const PriorConfig& priors1 = {},
                                       const PriorConfig& priors2 = {});

    bool has_upper() const noexcept { return layer2.has_value(); }
    void validate() const;
};

/// logit of layer 2's p(z_nl = 1), or logit(q_z) without a second layer.
double prior_logit_from_above(const HierarchicalModel& model, std::size_t n, std::size_t l);

/// Dense N×L table of prior_logit_from_above (uniform without a second layer).
ZPriorLogits z_prior_from_above(const HierarchicalModel& model);

/// Keeps one LayerSampler per layer across joint sweeps.
class HierarchicalSampler {
  public:
    HierarchicalSampler(HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask);

    /// layer1 Z (prior from above) and U, then layer2 V on the current layer1 Z,
    /// then MAP reliabilities for both layers when requested.
    void joint_sweep(Rng& rng, const SweepOptions& opts = {}, bool update_reliabilities = true);
    double log_likelihood() const { return lower_.log_likelihood(); }
    PosteriorSample snapshot() const;

  private:
    ZPriorLogits prior_table() const;

    HierarchicalModel* model_;
    LayerSampler lower_;
    std::optional<LayerSampler> upper_;
    HoldoutMask upper_mask_;
};

/// One joint sweep plus MAP updates; convenience wrapper over HierarchicalSampler.
void joint_sweep(HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask, Rng& rng);

/// Full chain over the stacked model; samples carry both layers.
PosteriorTrace run(HierarchicalModel& model, const BinaryMatrix& X, const HoldoutMask& mask,
                   const GibbsConfig& config);

enum class FactorKind { U, Z };

/// Entries (row, column) of one factor matrix of one layer (0 = data layer).
struct ClampTarget {
    std::size_t layer = 0;
    FactorKind matrix = FactorKind::U;
    std::vector<Cell> entries;
};

/// Fixes the listed entries to `values` and excludes them from all sweeps.
void clamp(HierarchicalModel& model, const ClampTarget& target, std::span<const std::uint8_t> values);
/// Releases the listed entries. The one-hot type factor cannot be released (ContractError).
void unclamp(HierarchicalModel& model, const ClampTarget& target);

} // namespace maxmachine
