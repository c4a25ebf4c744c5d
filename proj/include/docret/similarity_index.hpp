#pragma once

#include "docret/errors.hpp"
#include "docret/feature_model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace docret {

namespace detail {

// Plain left-to-right accumulation in double. Every similarity in the
// library goes through these two so that results are reproducible and
// cosine(u, v) == cosine(v, u) bit for bit.
template <typename DA, typename DB>
double dot(const Eigen::DenseBase<DA>& u, const Eigen::DenseBase<DB>& v)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        acc += static_cast<double>(u.derived().coeff(i)) * static_cast<double>(v.derived().coeff(i));
    }
    return acc;
}

template <typename D>
double norm(const Eigen::DenseBase<D>& u)
{
    return std::sqrt(dot(u, u));
}

inline double clamp_unit(double s)
{
    return std::clamp(s, -1.0, 1.0);
}

} // namespace detail

/// Cosine similarity clamped to [-1, 1]. Throws ValidationError on a
/// dimension mismatch or a zero vector.
template <typename DA, typename DB>
double cosine(const Eigen::DenseBase<DA>& u, const Eigen::DenseBase<DB>& v)
{
    if (u.size() != v.size()) {
        throw ValidationError("cosine of vectors with different dimensions");
    }
    const double nu = detail::norm(u);
    const double nv = detail::norm(v);
    if (!(nu > 0.0) || !(nv > 0.0)) {
        throw ValidationError("cosine of a zero vector");
    }
    return detail::clamp_unit(detail::dot(u, v) / (nu * nv));
}

struct RankedHit {
    ImageId id;
    double similarity = 0.0;
    std::size_t rank = 0;

    friend bool operator==(const RankedHit&, const RankedHit&) = default;
};

/// Strict ordering used for every ranking: similarity descending, then id.
inline bool ranks_before(double sim_a, const ImageId& a, double sim_b, const ImageId& b)
{
    if (sim_a != sim_b) {
        return sim_a > sim_b;
    }
    return a < b;
}

/**
 * Exact cosine index over an n x K matrix.
 *
 * Rows are stored as float32 (the persisted precision) with their L2 norms
 * accumulated in double. Immutable once built; queries are const and may
 * run concurrently.
 */
class RetrievalIndex {
public:
    RetrievalIndex() = default;

    /// Throws ValidationError on an empty matrix or a zero-norm row.
    static RetrievalIndex build(const FeatureMatrix& matrix);

    Eigen::Index size() const { return features_.rows(); }
    Eigen::Index dim() const { return features_.cols(); }
    const CorpusManifest& ids() const { return ids_; }
    const RowMatrixXf& features() const { return features_; }
    const Eigen::VectorXd& norms() const { return norms_; }

    /// Cosine of q to every row, in manifest order.
    std::vector<double> scores(const Eigen::Ref<const Eigen::VectorXd>& q) const;

    /// Top min(k, n) hits. k = size() yields the full ranking.
    std::vector<RankedHit> query(const Eigen::Ref<const Eigen::VectorXd>& q, std::size_t k) const;

    /// 1-based position of `target` in the full ranking of q, without sorting.
    std::size_t rank_of(const Eigen::Ref<const Eigen::VectorXd>& q, const ImageId& target) const;

private:
    friend RetrievalIndex read_index(std::istream& in);

    RowMatrixXf features_;
    CorpusManifest ids_;
    Eigen::VectorXd norms_;
};

inline RetrievalIndex build_index(const FeatureMatrix& matrix)
{
    return RetrievalIndex::build(matrix);
}

/**
 * Index file, little-endian:
 *   "FCIX" | version u16 (=1) | K u64 | n u64 | n id records (u16 length + UTF-8)
 *   | n*K float32 row-major | n float64 norms
 */
inline constexpr std::uint16_t index_file_version = 1;

void write_index(const RetrievalIndex& index, std::ostream& out);
void write_index(const RetrievalIndex& index, const std::string& path);
RetrievalIndex read_index(std::istream& in);
RetrievalIndex read_index(const std::string& path);

/// "rank<TAB>id<TAB>similarity" lines, similarity with 9 decimals.
void write_hits_tsv(const std::vector<RankedHit>& hits, std::ostream& out);

} // namespace docret
