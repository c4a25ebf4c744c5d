#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace docret {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Identity of a document image: the file stem, compared bytewise.
struct ImageId {
    std::string name;

    ImageId() = default;
    explicit ImageId(std::string n) : name(std::move(n)) {}

    friend bool operator==(const ImageId&, const ImageId&) = default;
    // std::string comparison is char_traits<char>::compare, i.e. memcmp order
    friend std::strong_ordering operator<=>(const ImageId& a, const ImageId& b)
    {
        const int c = a.name.compare(b.name);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
};

/// A feature-producing model and the square crop its inputs are cut to.
struct ModelTag {
    std::string name;
    std::uint32_t crop_size = 256;

    friend bool operator==(const ModelTag&, const ModelTag&) = default;
};

/// Crop size used for a well-known model name: 288 for GoogLeNet and
/// ResNet variants, 256 for everything else.
std::uint32_t default_crop_size(const std::string& model_name);

enum class CorpusRole { training, query, calibration };

/**
 * Ordered, duplicate-free list of image ids.
 *
 * The order is always bytewise-sorted and defines the row order of every
 * FeatureMatrix built over the manifest.
 */
class CorpusManifest {
public:
    CorpusManifest() = default;
    /// Sorts the ids. Throws ValidationError on empty or duplicate ids.
    explicit CorpusManifest(std::vector<ImageId> ids, CorpusRole role = CorpusRole::training);

    const std::vector<ImageId>& images() const { return images_; }
    CorpusRole role() const { return role_; }
    std::size_t size() const { return images_.size(); }
    bool empty() const { return images_.empty(); }
    const ImageId& operator[](std::size_t i) const { return images_[i]; }

    std::optional<std::size_t> index_of(const ImageId& id) const;
    bool contains(const ImageId& id) const { return index_of(id).has_value(); }

    friend bool operator==(const CorpusManifest& a, const CorpusManifest& b)
    {
        return a.images_ == b.images_;
    }

private:
    std::vector<ImageId> images_;
    CorpusRole role_ = CorpusRole::training;
};

CorpusManifest read_manifest(std::istream& in, CorpusRole role = CorpusRole::training);
CorpusManifest read_manifest_file(const std::string& path, CorpusRole role = CorpusRole::training);
void write_manifest(const CorpusManifest& manifest, std::ostream& out);

/**
 * n x d feature matrix of one model, row i belonging to manifest image i.
 *
 * Values are held in double precision; the interchange file stores them as
 * float32. Construction validates shape and finiteness.
 */
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(ModelTag model, CorpusManifest manifest, RowMatrixXd values);
    /// Empty (n = 0) matrix of the given dimension.
    FeatureMatrix(ModelTag model, CorpusManifest manifest, Eigen::Index dim);

    const ModelTag& model() const { return model_; }
    const CorpusManifest& manifest() const { return manifest_; }
    const RowMatrixXd& values() const { return values_; }

    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index dim() const { return dim_; }

    auto row(Eigen::Index i) const { return values_.row(i); }
    /// Row for an image id; throws AlignmentError naming the id if absent.
    Eigen::RowVectorXd row(const ImageId& id) const;

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b)
    {
        return a.model_ == b.model_ && a.manifest_ == b.manifest_ && a.dim_ == b.dim_
            && a.values_ == b.values_;
    }

private:
    ModelTag model_;
    CorpusManifest manifest_;
    Eigen::Index dim_ = 0;
    RowMatrixXd values_;
};

[[noreturn]] void throw_non_finite(const char* what);

/// Throws ValidationError if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& values, const char* what)
{
    if (!values.allFinite()) {
        throw_non_finite(what);
    }
}

/**
 * Reorders each matrix to the manifest's canonical order, keeping only the
 * manifest's rows. Throws AlignmentError naming the first missing id.
 */
FeatureMatrix align(const FeatureMatrix& matrix, const CorpusManifest& manifest);
std::vector<FeatureMatrix> align(const std::vector<FeatureMatrix>& matrices,
                                 const CorpusManifest& manifest);

struct CalibrationPair {
    ImageId query;
    ImageId original;

    friend bool operator==(const CalibrationPair&, const CalibrationPair&) = default;
};

/// The (query, original) index used both for calibration and as ground truth.
class CalibrationSet {
public:
    CalibrationSet() = default;
    /// Throws ValidationError on duplicate query ids.
    explicit CalibrationSet(std::vector<CalibrationPair> pairs);

    const std::vector<CalibrationPair>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    /// Checks every original is in `training` and every query in `queries`.
    void validate_against(const CorpusManifest& training, const CorpusManifest& queries) const;

    /// Manifest of all query ids.
    CorpusManifest query_manifest() const;

private:
    std::vector<CalibrationPair> pairs_;
};

/// "query<TAB>original" per line.
CalibrationSet read_calibration(std::istream& in);
CalibrationSet read_calibration_file(const std::string& path);
void write_calibration(const CalibrationSet& set, std::ostream& out);

} // namespace docret
