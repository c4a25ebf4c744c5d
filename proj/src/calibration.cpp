#include "docret/calibration.hpp"

#include "docret/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace docret {

RankResult rank_originals(const RetrievalIndex& index, const CalibrationSet& calibration,
                          const FeatureMatrix& query_features)
{
    if (query_features.dim() != index.dim()) {
        throw ValidationError("query features are " + std::to_string(query_features.dim())
                              + "-D but the index is " + std::to_string(index.dim()) + "-D");
    }
    RankResult result;
    result.ranks.reserve(calibration.size());
    result.queries.reserve(calibration.size());
    for (const auto& pair : calibration.pairs()) {
        if (!index.ids().contains(pair.original)) {
            throw ValidationError("calibration original '" + pair.original.name
                                  + "' is not in the index");
        }
        const Eigen::VectorXd q = query_features.row(pair.query).transpose();
        result.ranks.push_back(index.rank_of(q, pair.original));
        result.queries.push_back(pair.query);
    }
    return result;
}

double top_k_accuracy(const RankResult& ranks, std::size_t k)
{
    if (ranks.ranks.empty()) {
        throw ValidationError("top-k accuracy of an empty rank list");
    }
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    std::size_t hits = 0;
    for (const auto r : ranks.ranks) {
        if (r < 1) {
            throw ValidationError("ranks are 1-based");
        }
        hits += r <= k ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(ranks.ranks.size());
}

double rank_age(const RankResult& ranks)
{
    const double score = top_k_accuracy(ranks, 5);
    double sum = 0.0;
    for (const auto r : ranks.ranks) {
        sum += score / static_cast<double>(r);
    }
    return sum;
}

const ModelWeight& FusionWeights::at(const std::string& model) const
{
    const auto it = models_.find(model);
    if (it == models_.end()) {
        throw ValidationError("no fusion weight for model '" + model + "'");
    }
    return it->second;
}

double FusionWeights::epsilon_sum() const
{
    double sum = 0.0;
    for (const auto& [name, w] : models_) {
        sum += w.epsilon;
    }
    return sum;
}

FusionWeights FusionWeights::restrict_to(const std::vector<std::string>& models) const
{
    std::map<std::string, double> subset;
    for (const auto& m : models) {
        subset[m] = at(m).rank_age;
    }
    return coefficients(subset);
}

FusionWeights FusionWeights::from_values(std::map<std::string, ModelWeight> models, double tolerance)
{
    FusionWeights w;
    w.models_ = std::move(models);
    if (w.models_.empty()) {
        throw ValidationError("fusion weights need at least one model");
    }
    for (const auto& [name, mw] : w.models_) {
        if (!std::isfinite(mw.epsilon) || mw.epsilon < 0.0 || mw.epsilon > 1.0
            || !std::isfinite(mw.rank_age) || mw.rank_age < 0.0) {
            throw ValidationError("invalid fusion weight for model '" + name + "'");
        }
    }
    if (!(std::abs(w.epsilon_sum() - 1.0) <= tolerance)) {
        throw ValidationError("fusion coefficients do not sum to 1");
    }
    return w;
}

FusionWeights coefficients(const std::map<std::string, double>& rank_ages)
{
    if (rank_ages.empty()) {
        throw ValidationError("coefficients need at least one model");
    }
    double total = 0.0;
    for (const auto& [name, ra] : rank_ages) {
        if (!std::isfinite(ra) || ra < 0.0) {
            throw ValidationError("Rank_age of model '" + name + "' is negative or non-finite");
        }
        total += ra;
    }
    std::map<std::string, ModelWeight> models;
    for (const auto& [name, ra] : rank_ages) {
        const double eps = total > 0.0 ? ra / total : 1.0 / static_cast<double>(rank_ages.size());
        models.emplace(name, ModelWeight{ra, eps});
    }
    return FusionWeights::from_values(std::move(models));
}

namespace {

std::string format_g17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

} // namespace

void write_weights(const FusionWeights& weights, std::ostream& out)
{
    out << "model\trank_age\tepsilon\n";
    for (const auto& [name, w] : weights.models()) {
        out << name << '\t' << format_g17(w.rank_age) << '\t' << format_g17(w.epsilon) << '\n';
    }
}

FusionWeights read_weights(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "model\trank_age\tepsilon") {
        throw FormatError("weights file lacks the 'model<TAB>rank_age<TAB>epsilon' header");
    }
    std::map<std::string, ModelWeight> models;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string name, ra, eps;
        if (!std::getline(fields, name, '\t') || !std::getline(fields, ra, '\t')
            || !std::getline(fields, eps)) {
            throw FormatError("malformed weights line '" + line + "'");
        }
        ModelWeight w;
        try {
            w.rank_age = std::stod(ra);
            w.epsilon = std::stod(eps);
        } catch (const std::exception&) {
            throw FormatError("malformed number in weights line '" + line + "'");
        }
        if (!models.emplace(name, w).second) {
            throw ValidationError("duplicate model '" + name + "' in weights file");
        }
    }
    return FusionWeights::from_values(std::move(models));
}

FusionWeights read_weights_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open weights file '" + path + "'");
    }
    return read_weights(in);
}

void write_calibration_report(const std::vector<CalibrationRow>& rows, std::ostream& out)
{
    out << "model\tscore\trank_age\tepsilon\ttop1\ttop3\ttop5\ttop10\n";
    for (const auto& r : rows) {
        out << r.model << '\t' << format_fixed(r.score, 6) << '\t' << format_fixed(r.rank_age, 6)
            << '\t' << format_fixed(r.epsilon, 6) << '\t' << format_fixed(r.top1, 2) << '\t'
            << format_fixed(r.top3, 2) << '\t' << format_fixed(r.top5, 2) << '\t'
            << format_fixed(r.top10, 2) << '\n';
    }
}

} // namespace docret
