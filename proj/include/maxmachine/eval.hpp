#pragma once

#include "maxmachine/baseline.hpp"
#include "maxmachine/binmat.hpp"
#include "maxmachine/dataset.hpp"
#include "maxmachine/holdout.hpp"
#include "maxmachine/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace maxmachine {

/// round(fraction·N·D) distinct cells drawn uniformly; deterministic in `seed`.
/// Throws ConfigError unless 0 < fraction < 1.
HoldoutMask make_holdout(std::size_t n_objects, std::size_t n_attributes, double fraction,
                         std::uint64_t seed);

/// Mann–Whitney estimate of ROC-AUC with average ranks for ties.
/// Throws UndefinedMetricError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Object -> cluster assignment supplied as metadata.
struct ClusterMap {
    std::vector<std::string> names;
    std::vector<std::uint32_t> cluster_of;
};

struct ClusterRow {
    std::string cluster;
    std::optional<double> auc_model;    ///< nullopt when the cluster was skipped
    std::optional<double> auc_baseline;
    std::size_t n_cells = 0;

    std::optional<double> delta() const {
        if (!auc_model || !auc_baseline) return std::nullopt;
        return *auc_model - *auc_baseline;
    }
    bool skipped() const noexcept { return !auc_model.has_value(); }
};

struct EvalReport {
    double auc_model = 0.0;
    double auc_baseline = 0.0;
    std::size_t n_test_cells = 0;
    std::vector<ClusterRow> clusters;
};

/// Scores every held-out cell with both predictors and computes overall and per-cluster AUC.
/// Clusters whose test cells hold a single class are reported as skipped.
EvalReport evaluate_scores(std::span<const double> model_scores,
                           std::span<const double> baseline_scores,
                           std::span<const std::uint8_t> labels, std::span<const Cell> cells,
                           const ClusterMap* clusters = nullptr);

/// Throws ConfigError for an empty mask.
EvalReport evaluate(const PosteriorTrace& trace, const TypeFrequencyTable& baseline,
                    const BinaryMatrix& X, const HoldoutMask& mask,
                    const ClusterMap* clusters = nullptr);

/// `cluster,auc_model,auc_baseline,delta,n_cells`; first row is the overall result ("all"),
/// skipped clusters carry NA.
void write_report_csv(const EvalReport& report, std::ostream& out);

struct ApplicabilityRow {
    std::string type;
    double mean_p = 0.0;
    std::optional<double> mean_p_absent; ///< nullopt when no product of the type lacks the attribute
    std::size_t n_products = 0;
};

/// Per-type mean of p(apply) for one attribute, top_k types by mean_p descending.
/// `p_by_object` holds the attribute's predictive probability for each object.
std::vector<ApplicabilityRow> applicability_rows(std::span<const double> p_by_object,
                                                 const TripletDataset& data, std::size_t attribute,
                                                 std::size_t top_k);

/// Throws LookupError for an unknown attribute id.
std::vector<ApplicabilityRow> applicability_report(const PosteriorTrace& trace,
                                                   const TripletDataset& data,
                                                   const std::string& attribute, std::size_t top_k);

/// `type,mean_p,mean_p_absent,n_products`; NA for an empty absent set.
void write_applicability_csv(const std::vector<ApplicabilityRow>& rows, std::ostream& out);

} // namespace maxmachine
