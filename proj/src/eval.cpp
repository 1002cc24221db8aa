#include "maxmachine/eval.hpp"

#include "maxmachine/errors.hpp"
#include "maxmachine/model.hpp"
#include "maxmachine/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>

namespace maxmachine {

HoldoutMask make_holdout(std::size_t n_objects, std::size_t n_attributes, double fraction,
                         std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0,1)");
    const std::uint64_t total = static_cast<std::uint64_t>(n_objects) * n_attributes;
    const auto k = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(total)));
    // Selection sampling: each index is kept with probability (needed / remaining).
    std::vector<std::uint64_t> picked;
    picked.reserve(k);
    Rng rng(seed);
    for (std::uint64_t i = 0; i < total && picked.size() < k; ++i) {
        const std::uint64_t needed = k - picked.size();
        if (static_cast<double>(total - i) * uniform01(rng) < static_cast<double>(needed)) picked.push_back(i);
    }
    std::vector<Cell> cells;
    cells.reserve(picked.size());
    for (auto idx : picked) cells.push_back({static_cast<std::size_t>(idx / n_attributes),
                                             static_cast<std::size_t>(idx % n_attributes)});
    return HoldoutMask(n_objects, n_attributes, std::move(cells), fraction, seed);
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw ShapeError("roc_auc: scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Ranks i+1 .. j share their average.
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]]) {
                rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) throw UndefinedMetricError("roc_auc needs both classes");
    const double p = static_cast<double>(positives);
    const double u = rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

namespace {

bool has_both_classes(std::span<const std::uint8_t> labels) {
    bool pos = false;
    bool neg = false;
    for (auto l : labels) (l ? pos : neg) = true;
    return pos && neg;
}

} // namespace

EvalReport evaluate_scores(std::span<const double> model_scores, std::span<const double> baseline_scores,
                           std::span<const std::uint8_t> labels, std::span<const Cell> cells,
                           const ClusterMap* clusters) {
    if (model_scores.size() != labels.size() || baseline_scores.size() != labels.size() ||
        cells.size() != labels.size()) {
        throw ShapeError("evaluate: scores, labels and cells must align");
    }
    if (labels.empty()) throw ConfigError("evaluate: no held-out cells");
    EvalReport report;
    report.n_test_cells = labels.size();
    report.auc_model = roc_auc(model_scores, labels);
    report.auc_baseline = roc_auc(baseline_scores, labels);
    if (clusters == nullptr) return report;

    const std::size_t K = clusters->names.size();
    std::vector<std::vector<std::size_t>> members(K);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].n >= clusters->cluster_of.size()) throw BoundsError("evaluate: object without cluster");
        const auto c = clusters->cluster_of[cells[i].n];
        if (c >= K) throw BoundsError("evaluate: cluster index out of range");
        members[c].push_back(i);
    }
    for (std::size_t c = 0; c < K; ++c) {
        ClusterRow row;
        row.cluster = clusters->names[c];
        row.n_cells = members[c].size();
        std::vector<double> ms;
        std::vector<double> bs;
        std::vector<std::uint8_t> ls;
        for (auto i : members[c]) {
            ms.push_back(model_scores[i]);
            bs.push_back(baseline_scores[i]);
            ls.push_back(labels[i]);
        }
        if (has_both_classes(ls)) {
            row.auc_model = roc_auc(ms, ls);
            row.auc_baseline = roc_auc(bs, ls);
        }
        report.clusters.push_back(std::move(row));
    }
    return report;
}

EvalReport evaluate(const PosteriorTrace& trace, const TypeFrequencyTable& baseline,
                    const BinaryMatrix& X, const HoldoutMask& mask, const ClusterMap* clusters) {
    if (mask.empty()) throw ConfigError("evaluate: holdout mask is empty");
    const auto& cells = mask.cells();
    const std::vector<double> model_scores = posterior_predictive(trace, cells);
    std::vector<double> baseline_scores;
    std::vector<std::uint8_t> labels;
    baseline_scores.reserve(cells.size());
    labels.reserve(cells.size());
    for (const Cell& c : cells) {
        baseline_scores.push_back(predict_baseline(baseline, c.n, c.d));
        labels.push_back(X.get(c.n, c.d) ? 1 : 0);
    }
    return evaluate_scores(model_scores, baseline_scores, labels, cells, clusters);
}

namespace {

void write_value(std::ostream& out, const std::optional<double>& v) {
    if (v) {
        out << *v;
    } else {
        out << "NA";
    }
}

} // namespace

void write_report_csv(const EvalReport& report, std::ostream& out) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(10);
    out << "cluster,auc_model,auc_baseline,delta,n_cells\n";
    out << "all," << report.auc_model << ',' << report.auc_baseline << ','
        << report.auc_model - report.auc_baseline << ',' << report.n_test_cells << '\n';
    for (const auto& row : report.clusters) {
        out << row.cluster << ',';
        write_value(out, row.auc_model);
        out << ',';
        write_value(out, row.auc_baseline);
        out << ',';
        write_value(out, row.delta());
        out << ',' << row.n_cells << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

std::vector<ApplicabilityRow> applicability_rows(std::span<const double> p_by_object,
                                                 const TripletDataset& data, std::size_t attribute,
                                                 std::size_t top_k) {
    if (p_by_object.size() != data.n_objects()) throw ShapeError("one probability per object required");
    if (attribute >= data.n_attributes()) throw LookupError("attribute index out of range");
    std::vector<bool> present(data.n_objects(), false);
    for (const auto& [n, d] : data.pairs) {
        if (d == attribute) present[n] = true;
    }
    const std::size_t T = data.n_types();
    std::vector<double> sum(T, 0.0);
    std::vector<double> sum_absent(T, 0.0);
    std::vector<std::size_t> count(T, 0);
    std::vector<std::size_t> count_absent(T, 0);
    for (std::size_t n = 0; n < data.n_objects(); ++n) {
        const auto t = data.type_of[n];
        sum[t] += p_by_object[n];
        ++count[t];
        if (!present[n]) {
            sum_absent[t] += p_by_object[n];
            ++count_absent[t];
        }
    }
    std::vector<ApplicabilityRow> rows;
    for (std::size_t t = 0; t < T; ++t) {
        if (count[t] == 0) continue;
        ApplicabilityRow row;
        row.type = data.type_names[t];
        row.n_products = count[t];
        row.mean_p = sum[t] / static_cast<double>(count[t]);
        if (count_absent[t] > 0) row.mean_p_absent = sum_absent[t] / static_cast<double>(count_absent[t]);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ApplicabilityRow& a, const ApplicabilityRow& b) { return a.mean_p > b.mean_p; });
    if (rows.size() > top_k) rows.resize(top_k);
    return rows;
}

std::vector<ApplicabilityRow> applicability_report(const PosteriorTrace& trace,
                                                   const TripletDataset& data,
                                                   const std::string& attribute, std::size_t top_k) {
    const std::size_t d = data.attribute_index(attribute);
    std::vector<Cell> cells(data.n_objects());
    for (std::size_t n = 0; n < cells.size(); ++n) cells[n] = {n, d};
    const std::vector<double> p = posterior_predictive(trace, cells);
    return applicability_rows(p, data, d, top_k);
}

void write_applicability_csv(const std::vector<ApplicabilityRow>& rows, std::ostream& out) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(10);
    out << "type,mean_p,mean_p_absent,n_products\n";
    for (const auto& row : rows) {
        out << row.type << ',' << row.mean_p << ',';
        write_value(out, row.mean_p_absent);
        out << ',' << row.n_products << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

} // namespace maxmachine
