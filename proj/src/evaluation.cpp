#include "docret/evaluation.hpp"

#include "docret/errors.hpp"
#include "docret/similarity_index.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace docret {

AccuracyRow accuracy_row(const std::string& method, const RankResult& ranks,
                         std::span<const std::size_t> ks)
{
    AccuracyRow row{method, {}};
    for (const auto k : ks) {
        row.percent.push_back(100.0 * top_k_accuracy(ranks, k));
    }
    return row;
}

RankResult rank_configuration(const std::vector<ModelArtifacts>& models,
                              const FusionWeights& weights, const CalibrationSet& truth)
{
    if (models.empty()) {
        throw ValidationError("evaluation configuration has no models");
    }
    if (truth.empty()) {
        throw ValidationError("evaluation needs at least one ground-truth pair");
    }
    std::vector<FeatureMatrix> training;
    std::vector<FeatureMatrix> queries;
    for (const auto& m : models) {
        if (m.training.model().name != m.queries.model().name) {
            throw ValidationError("training and query features disagree on the model name");
        }
        training.push_back(m.training);
        queries.push_back(m.queries);
    }
    const FusedMatrix corpus = fuse(training, weights);
    const FusedMatrix fused_queries = fuse(queries, weights);
    const RetrievalIndex index = build_index(corpus.matrix);
    return rank_originals(index, truth, fused_queries.matrix);
}

AccuracyRow evaluate_configuration(const std::string& method,
                                   const std::vector<ModelArtifacts>& models,
                                   const FusionWeights& weights, const CalibrationSet& truth,
                                   std::span<const std::size_t> ks)
{
    return accuracy_row(method, rank_configuration(models, weights, truth), ks);
}

void check_monotone(const AccuracyReport& report)
{
    for (const auto& row : report.rows) {
        if (row.percent.size() != report.ks.size()) {
            throw ValidationError("report row '" + row.method + "' has the wrong number of columns");
        }
        for (std::size_t i = 0; i < row.percent.size(); ++i) {
            if (!(row.percent[i] >= 0.0 && row.percent[i] <= 100.0)) {
                throw ValidationError("report row '" + row.method + "' has a value outside [0, 100]");
            }
            if (i > 0 && row.percent[i] < row.percent[i - 1]) {
                throw ValidationError("report row '" + row.method + "' decreases with k");
            }
        }
    }
}

void write_report(const AccuracyReport& report, std::ostream& out)
{
    out << "method";
    for (const auto k : report.ks) {
        out << "\ttop" << k;
    }
    out << '\n';
    char buf[32];
    for (const auto& row : report.rows) {
        out << row.method;
        for (const double p : row.percent) {
            std::snprintf(buf, sizeof buf, "%.2f", p);
            out << '\t' << buf;
        }
        out << '\n';
    }
}

std::string format_report(const AccuracyReport& report)
{
    std::ostringstream out;
    write_report(report, out);
    return out.str();
}

} // namespace docret
