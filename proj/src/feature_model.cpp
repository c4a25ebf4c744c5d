#include "docret/feature_model.hpp"

#include "docret/errors.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace docret {

std::uint32_t default_crop_size(const std::string& model_name)
{
    if (model_name.starts_with("googlenet") || model_name.starts_with("resnet")) {
        return 288;
    }
    return 256;
}

CorpusManifest::CorpusManifest(std::vector<ImageId> ids, CorpusRole role)
    : images_(std::move(ids)), role_(role)
{
    std::sort(images_.begin(), images_.end());
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (images_[i].name.empty()) {
            throw ValidationError("manifest contains an empty image id");
        }
        if (i > 0 && images_[i] == images_[i - 1]) {
            throw ValidationError("manifest contains duplicate image id '" + images_[i].name + "'");
        }
    }
}

std::optional<std::size_t> CorpusManifest::index_of(const ImageId& id) const
{
    const auto it = std::lower_bound(images_.begin(), images_.end(), id);
    if (it == images_.end() || *it != id) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - images_.begin());
}

namespace {

std::ifstream open_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open '" + path + "'");
    }
    return in;
}

} // namespace

CorpusManifest read_manifest(std::istream& in, CorpusRole role)
{
    std::vector<ImageId> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        ids.emplace_back(line);
    }
    return CorpusManifest(std::move(ids), role);
}

CorpusManifest read_manifest_file(const std::string& path, CorpusRole role)
{
    auto in = open_text(path);
    return read_manifest(in, role);
}

void write_manifest(const CorpusManifest& manifest, std::ostream& out)
{
    for (const auto& id : manifest.images()) {
        out << id.name << '\n';
    }
}

void throw_non_finite(const char* what)
{
    throw ValidationError(std::string(what) + " contains a non-finite value");
}

FeatureMatrix::FeatureMatrix(ModelTag model, CorpusManifest manifest, RowMatrixXd values)
    : model_(std::move(model)), manifest_(std::move(manifest)), dim_(values.cols()),
      values_(std::move(values))
{
    if (model_.name.empty()) {
        throw ValidationError("feature matrix has an empty model name");
    }
    if (model_.crop_size == 0) {
        throw ValidationError("model '" + model_.name + "' has crop size 0");
    }
    if (dim_ <= 0) {
        throw ValidationError("feature matrix of model '" + model_.name + "' has dimension 0");
    }
    if (static_cast<std::size_t>(values_.rows()) != manifest_.size()) {
        throw AlignmentError("feature matrix of model '" + model_.name + "' has "
                             + std::to_string(values_.rows()) + " rows but its manifest lists "
                             + std::to_string(manifest_.size()) + " images");
    }
    require_finite(values_, "feature matrix");
}

FeatureMatrix::FeatureMatrix(ModelTag model, CorpusManifest manifest, Eigen::Index dim)
    : FeatureMatrix(std::move(model), std::move(manifest), RowMatrixXd(0, dim))
{
}

Eigen::RowVectorXd FeatureMatrix::row(const ImageId& id) const
{
    const auto i = manifest_.index_of(id);
    if (!i) {
        throw AlignmentError("image '" + id.name + "' is missing from features of model '"
                             + model_.name + "'");
    }
    return values_.row(static_cast<Eigen::Index>(*i));
}

FeatureMatrix align(const FeatureMatrix& matrix, const CorpusManifest& manifest)
{
    RowMatrixXd values(static_cast<Eigen::Index>(manifest.size()), matrix.dim());
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto src = matrix.manifest().index_of(manifest[i]);
        if (!src) {
            throw AlignmentError("image '" + manifest[i].name
                                 + "' is missing from features of model '"
                                 + matrix.model().name + "'");
        }
        values.row(static_cast<Eigen::Index>(i)) = matrix.values().row(static_cast<Eigen::Index>(*src));
    }
    return FeatureMatrix(matrix.model(), manifest, std::move(values));
}

std::vector<FeatureMatrix> align(const std::vector<FeatureMatrix>& matrices,
                                 const CorpusManifest& manifest)
{
    std::vector<FeatureMatrix> out;
    out.reserve(matrices.size());
    for (const auto& m : matrices) {
        out.push_back(align(m, manifest));
    }
    return out;
}

CalibrationSet::CalibrationSet(std::vector<CalibrationPair> pairs) : pairs_(std::move(pairs))
{
    std::set<ImageId> seen;
    for (const auto& p : pairs_) {
        if (p.query.name.empty() || p.original.name.empty()) {
            throw ValidationError("calibration pair with an empty image id");
        }
        if (!seen.insert(p.query).second) {
            throw ValidationError("duplicate calibration query '" + p.query.name + "'");
        }
    }
}

void CalibrationSet::validate_against(const CorpusManifest& training,
                                      const CorpusManifest& queries) const
{
    for (const auto& p : pairs_) {
        if (!training.contains(p.original)) {
            throw ValidationError("calibration original '" + p.original.name
                                  + "' is not in the training manifest");
        }
        if (!queries.contains(p.query)) {
            throw ValidationError("calibration query '" + p.query.name
                                  + "' is not in the query manifest");
        }
    }
}

CorpusManifest CalibrationSet::query_manifest() const
{
    std::vector<ImageId> ids;
    ids.reserve(pairs_.size());
    for (const auto& p : pairs_) {
        ids.push_back(p.query);
    }
    return CorpusManifest(std::move(ids), CorpusRole::calibration);
}

CalibrationSet read_calibration(std::istream& in)
{
    std::vector<CalibrationPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw FormatError("calibration line " + std::to_string(line_no)
                              + " is not 'query<TAB>original'");
        }
        pairs.push_back({ImageId(line.substr(0, tab)), ImageId(line.substr(tab + 1))});
    }
    return CalibrationSet(std::move(pairs));
}

CalibrationSet read_calibration_file(const std::string& path)
{
    auto in = open_text(path);
    return read_calibration(in);
}

void write_calibration(const CalibrationSet& set, std::ostream& out)
{
    for (const auto& p : set.pairs()) {
        out << p.query.name << '\t' << p.original.name << '\n';
    }
}

} // namespace docret
