#pragma once

#include "docret/errors.hpp"
#include "docret/feature_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <string>

namespace docret {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Mean, orthonormal basis (k x d, one eigenvector per row) and descending
/// eigenvalues of one model's feature space.
template <typename Scalar>
struct BasicPcaModel {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector mean;
    Vector eigenvalues;
    RowMatrix<Scalar> basis;

    Eigen::Index source_dim() const { return mean.size(); }
    Eigen::Index target_dim() const { return basis.rows(); }

    friend bool operator==(const BasicPcaModel& a, const BasicPcaModel& b)
    {
        return a.mean.size() == b.mean.size() && a.basis.rows() == b.basis.rows()
            && a.mean == b.mean && a.eigenvalues == b.eigenvalues && a.basis == b.basis;
    }
};

using PcaModel = BasicPcaModel<double>;

/**
 * C = (1/n) sum_i x_i x_i^T over the rows x_i, optionally mean-centred first.
 * The result is symmetrised, so it equals its transpose exactly.
 */
template <typename Derived>
RowMatrix<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& rows,
                                               bool centered = true)
{
    using Scalar = typename Derived::Scalar;
    if (rows.rows() < 1) {
        throw ValidationError("covariance of an empty matrix");
    }
    RowMatrix<Scalar> x = rows;
    if (centered) {
        x.rowwise() -= x.colwise().mean();
    }
    RowMatrix<Scalar> c = (x.transpose() * x) / static_cast<Scalar>(x.rows());
    return (c + c.transpose()) / Scalar(2);
}

namespace detail {

// Largest-magnitude entry made positive; the first index wins exact ties.
template <typename Derived>
void canonicalize_sign(Eigen::MatrixBase<Derived>&& v)
{
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v(i)) > std::abs(v(best))) {
            best = i;
        }
    }
    if (v(best) < 0) {
        v = -v;
    }
}

// Modified Gram-Schmidt, applied twice. Rows that collapse are replaced by
// the coordinate axis with the largest residual.
template <typename Scalar>
void orthonormalize_rows(RowMatrix<Scalar>& basis)
{
    const Eigen::Index d = basis.cols();
    for (Eigen::Index j = 0; j < basis.rows(); ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < j; ++i) {
                basis.row(j) -= basis.row(i).dot(basis.row(j)) * basis.row(i);
            }
        }
        Scalar norm = basis.row(j).norm();
        if (!(norm > Scalar(1e-8))) {
            Eigen::Matrix<Scalar, 1, Eigen::Dynamic> best;
            Scalar best_norm = -1;
            for (Eigen::Index axis = 0; axis < d; ++axis) {
                Eigen::Matrix<Scalar, 1, Eigen::Dynamic> e = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Unit(d, axis);
                for (int pass = 0; pass < 2; ++pass) {
                    for (Eigen::Index i = 0; i < j; ++i) {
                        e -= basis.row(i).dot(e) * basis.row(i);
                    }
                }
                if (e.norm() > best_norm) {
                    best_norm = e.norm();
                    best = e;
                }
            }
            basis.row(j) = best;
            norm = best_norm;
        }
        basis.row(j) /= norm;
    }
}

} // namespace detail

/**
 * Fits PCA to the rows of `rows` (n samples x d features).
 *
 * Keeps k = min(target_dim, d, n - 1) leading eigenpairs of the mean-centred
 * covariance. When d > n the n x n Gram matrix is decomposed instead and its
 * eigenvectors mapped back; both routes share the same nonzero spectrum.
 * Eigenvalues are clamped to be non-negative and every basis vector has its
 * largest-magnitude entry positive.
 */
template <typename Derived>
BasicPcaModel<typename Derived::Scalar> fit_pca(const Eigen::MatrixBase<Derived>& rows,
                                                Eigen::Index target_dim)
{
    using Scalar = typename Derived::Scalar;
    using Solver = Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;

    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (n < 2) {
        throw ValidationError("PCA needs at least 2 samples, got " + std::to_string(n));
    }
    if (target_dim < 1) {
        throw ValidationError("PCA target dimension must be at least 1");
    }
    const Eigen::Index k = std::min({target_dim, d, n - 1});

    BasicPcaModel<Scalar> model;
    model.mean = rows.colwise().mean().transpose();
    RowMatrix<Scalar> centred = rows;
    centred.rowwise() -= model.mean.transpose();

    const bool use_gram = d > n;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m;
    if (use_gram) {
        m = centred * centred.transpose() / static_cast<Scalar>(n);
        m = (m + m.transpose().eval()) / Scalar(2);
    } else {
        m = covariance(rows, true);
    }
    Solver solver(m);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigendecomposition did not converge");
    }

    // eigenvalues come back ascending
    const Eigen::Index size = m.rows();
    model.eigenvalues.resize(k);
    model.basis.resize(k, d);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::Index src = size - 1 - j;
        model.eigenvalues(j) = std::max(Scalar(0), solver.eigenvalues()(src));
        if (use_gram) {
            model.basis.row(j) = (centred.transpose() * solver.eigenvectors().col(src)).transpose();
        } else {
            model.basis.row(j) = solver.eigenvectors().col(src).transpose();
        }
    }
    if (use_gram) {
        detail::orthonormalize_rows(model.basis);
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        detail::canonicalize_sign(model.basis.row(j));
    }
    if (!model.basis.allFinite() || !model.eigenvalues.allFinite()) {
        throw NumericalError("PCA produced non-finite eigenpairs");
    }
    return model;
}

/// Row i of the result is basis * (row i - mean).
template <typename Scalar, typename Derived>
RowMatrix<Scalar> project(const BasicPcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& rows)
{
    if (rows.cols() != model.source_dim()) {
        throw ValidationError("cannot project " + std::to_string(rows.cols())
                              + "-D features with a PCA model fitted on "
                              + std::to_string(model.source_dim()) + "-D features");
    }
    RowMatrix<Scalar> centred = rows.template cast<Scalar>();
    centred.rowwise() -= model.mean.transpose();
    return centred * model.basis.transpose();
}

/// Scales every nonzero row to unit L2 norm; zero rows are left as they are.
template <typename Scalar>
void normalize_rows(RowMatrix<Scalar>& rows)
{
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const Scalar norm = rows.row(i).norm();
        if (norm > Scalar(0)) {
            rows.row(i) /= norm;
        }
    }
}

// FeatureMatrix front end

RowMatrixXd covariance(const FeatureMatrix& matrix, bool centered = true);

/// fit_pca over the matrix rows. Callers compare target_dim() with the
/// requested dimension to detect a shortfall.
PcaModel fit(const FeatureMatrix& matrix, Eigen::Index target_dim = 256);

/// Projects and, when `l2_normalize` is set, scales rows to unit length.
/// The result keeps the input's model tag and manifest.
FeatureMatrix project(const PcaModel& model, const FeatureMatrix& matrix, bool l2_normalize = false);

/**
 * Binary PCA model file, little-endian:
 *   "FCPC" | version u16 (=1) | source_dim u64 | target_dim u64
 *   | mean f64 x d | eigenvalues f64 x k | basis f64 x (k*d), row-major
 */
inline constexpr std::uint16_t pca_file_version = 1;

void write_pca_model(const PcaModel& model, std::ostream& out);
void write_pca_model(const PcaModel& model, const std::string& path);
PcaModel read_pca_model(std::istream& in);
PcaModel read_pca_model(const std::string& path);

} // namespace docret
