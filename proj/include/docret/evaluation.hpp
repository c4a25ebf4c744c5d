#pragma once

#include "docret/calibration.hpp"
#include "docret/feature_model.hpp"
#include "docret/fusion.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace docret {

inline const std::vector<std::size_t> standard_ks{1, 3, 5, 10};

/// Reduced (and normally L2-normalised) features of one model for both the
/// indexed training corpus and the held-out queries.
struct ModelArtifacts {
    FeatureMatrix training;
    FeatureMatrix queries;

    const std::string& name() const { return training.model().name; }
};

struct AccuracyRow {
    std::string method;
    std::vector<double> percent; // one entry per k, in [0, 100]
};

struct AccuracyReport {
    std::vector<std::size_t> ks = standard_ks;
    std::vector<AccuracyRow> rows;
};

/// 100 * top_k_accuracy at each k.
AccuracyRow accuracy_row(const std::string& method, const RankResult& ranks,
                         std::span<const std::size_t> ks = standard_ks);

/**
 * Ranks every truth pair against the configuration's index. A single model
 * is indexed as is; several are fused with `weights` (which must cover
 * exactly those models) for both the corpus and the queries.
 */
RankResult rank_configuration(const std::vector<ModelArtifacts>& models,
                              const FusionWeights& weights, const CalibrationSet& truth);

AccuracyRow evaluate_configuration(const std::string& method,
                                   const std::vector<ModelArtifacts>& models,
                                   const FusionWeights& weights, const CalibrationSet& truth,
                                   std::span<const std::size_t> ks = standard_ks);

/// Throws ValidationError if some row is not non-decreasing in k or leaves [0, 100].
void check_monotone(const AccuracyReport& report);

/// "method<TAB>top1<TAB>top3..." header then one row per configuration, in
/// input order, percentages with 2 decimals.
void write_report(const AccuracyReport& report, std::ostream& out);
std::string format_report(const AccuracyReport& report);

} // namespace docret
