#pragma once

#include "docret/feature_model.hpp"
#include "docret/similarity_index.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace docret {

/// 1-based rank of each calibration query's original in its full ranking.
struct RankResult {
    std::vector<std::size_t> ranks;
    std::vector<ImageId> queries; // parallel to ranks; may be empty for hand-built results
};

/**
 * Ranks every original against the whole index for its query. The index must
 * hold the training corpus only; queries are looked up in `query_features`.
 * Ties are broken by image id, so the result does not depend on row order.
 */
RankResult rank_originals(const RetrievalIndex& index, const CalibrationSet& calibration,
                          const FeatureMatrix& query_features);

/// Fraction of ranks <= k.
double top_k_accuracy(const RankResult& ranks, std::size_t k);

/// score * sum(1 / rank_i), with score the Top-5 accuracy of the same ranks.
double rank_age(const RankResult& ranks);

struct ModelWeight {
    double rank_age = 0.0;
    double epsilon = 0.0;

    friend bool operator==(const ModelWeight&, const ModelWeight&) = default;
};

/// Per-model Rank_age and combination coefficient, keyed by model name.
class FusionWeights {
public:
    FusionWeights() = default;

    const std::map<std::string, ModelWeight>& models() const { return models_; }
    std::size_t size() const { return models_.size(); }
    const ModelWeight& at(const std::string& model) const;
    bool contains(const std::string& model) const { return models_.contains(model); }
    double epsilon_sum() const;

    /// Coefficients recomputed over a subset of models from their Rank_ages.
    FusionWeights restrict_to(const std::vector<std::string>& models) const;

    /// Trusted construction from already-normalised values. Throws
    /// ValidationError unless the epsilons sum to 1 within `tolerance`.
    static FusionWeights from_values(std::map<std::string, ModelWeight> models,
                                     double tolerance = 1e-12);

    friend bool operator==(const FusionWeights&, const FusionWeights&) = default;

private:
    std::map<std::string, ModelWeight> models_;
};

/// epsilon_m = rank_age_m / sum; uniform when every rank_age is 0.
FusionWeights coefficients(const std::map<std::string, double>& rank_ages);

/// "model<TAB>rank_age<TAB>epsilon" with a header row, values as %.17g.
void write_weights(const FusionWeights& weights, std::ostream& out);
FusionWeights read_weights(std::istream& in);
FusionWeights read_weights_file(const std::string& path);

struct CalibrationRow {
    std::string model;
    double score = 0.0;
    double rank_age = 0.0;
    double epsilon = 0.0;
    double top1 = 0.0, top3 = 0.0, top5 = 0.0, top10 = 0.0; // percent
};

/// TSV: model, score, rank_age, epsilon, top1, top3, top5, top10.
void write_calibration_report(const std::vector<CalibrationRow>& rows, std::ostream& out);

} // namespace docret
