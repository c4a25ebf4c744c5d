#include "docret/pca.hpp"

#include "binary_io.hpp"

#include <fstream>

namespace docret {

RowMatrixXd covariance(const FeatureMatrix& matrix, bool centered)
{
    return covariance(matrix.values(), centered);
}

PcaModel fit(const FeatureMatrix& matrix, Eigen::Index target_dim)
{
    return fit_pca(matrix.values(), target_dim);
}

FeatureMatrix project(const PcaModel& model, const FeatureMatrix& matrix, bool l2_normalize)
{
    if (matrix.dim() != model.source_dim()) {
        throw ValidationError("features of model '" + matrix.model().name + "' are "
                              + std::to_string(matrix.dim()) + "-D but the PCA model expects "
                              + std::to_string(model.source_dim()) + "-D input");
    }
    if (matrix.rows() == 0) {
        return FeatureMatrix(matrix.model(), matrix.manifest(), model.target_dim());
    }
    RowMatrixXd reduced = project(model, matrix.values());
    if (l2_normalize) {
        normalize_rows(reduced);
    }
    return FeatureMatrix(matrix.model(), matrix.manifest(), std::move(reduced));
}

void write_pca_model(const PcaModel& model, std::ostream& out)
{
    using namespace detail;
    out.write("FCPC", 4);
    put_uint<std::uint16_t>(out, pca_file_version);
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(model.source_dim()));
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(model.target_dim()));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i) {
        put_f64(out, model.mean(i));
    }
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) {
        put_f64(out, model.eigenvalues(i));
    }
    for (Eigen::Index i = 0; i < model.basis.size(); ++i) {
        put_f64(out, model.basis.data()[i]);
    }
    if (!out) {
        throw IngestionError("failed writing PCA model");
    }
}

void write_pca_model(const PcaModel& model, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IngestionError("cannot create '" + path + "'");
    }
    write_pca_model(model, out);
}

PcaModel read_pca_model(std::istream& in)
{
    using namespace detail;
    expect_magic(in, "FCPC");
    const auto version = get_uint<std::uint16_t>(in, "version");
    if (version != pca_file_version) {
        throw FormatError("unsupported PCA file version " + std::to_string(version));
    }
    const auto d = get_uint<std::uint64_t>(in, "source dimension");
    const auto k = get_uint<std::uint64_t>(in, "target dimension");
    if (d == 0 || k == 0 || k > d || d > (std::uint64_t{1} << 24)) {
        throw FormatError("PCA file declares an implausible shape");
    }
    PcaModel model;
    model.mean.resize(static_cast<Eigen::Index>(d));
    model.eigenvalues.resize(static_cast<Eigen::Index>(k));
    model.basis.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i) {
        model.mean(i) = get_f64(in, "mean");
    }
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) {
        model.eigenvalues(i) = get_f64(in, "eigenvalues");
    }
    for (Eigen::Index i = 0; i < model.basis.size(); ++i) {
        model.basis.data()[i] = get_f64(in, "basis");
    }
    expect_end(in);
    require_finite(model.mean, "PCA mean");
    require_finite(model.eigenvalues, "PCA eigenvalues");
    require_finite(model.basis, "PCA basis");
    return model;
}

PcaModel read_pca_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open PCA model '" + path + "'");
    }
    return read_pca_model(in);
}

} // namespace docret
