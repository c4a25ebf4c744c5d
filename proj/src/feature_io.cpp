#include "docret/feature_io.hpp"

#include "binary_io.hpp"

#include <cmath>
#include <fstream>

namespace docret {

RowMatrixXd round_to_f32(const RowMatrixXd& values)
{
    return values.cast<float>().cast<double>();
}

void write_feature_file(const FeatureMatrix& matrix, std::ostream& out)
{
    using namespace detail;
    const RowMatrixXf payload = matrix.values().cast<float>();
    // doubles beyond float range turn into infinities here
    require_finite(payload, "feature matrix (as float32)");

    out.write("FCBF", 4);
    put_uint<std::uint16_t>(out, feature_file_version);
    put_string16(out, matrix.model().name, "model name");
    put_uint<std::uint32_t>(out, matrix.model().crop_size);
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.rows()));
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.dim()));
    put_ids(out, matrix.manifest());
    for (Eigen::Index i = 0; i < payload.size(); ++i) {
        put_f32(out, payload.data()[i]);
    }
    if (!out) {
        throw IngestionError("failed writing feature file");
    }
}

void write_feature_file(const FeatureMatrix& matrix, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IngestionError("cannot create '" + path + "'");
    }
    write_feature_file(matrix, out);
}

FeatureMatrix read_feature_file(std::istream& in)
{
    using namespace detail;
    expect_magic(in, "FCBF");
    const auto version = get_uint<std::uint16_t>(in, "version");
    if (version != feature_file_version) {
        throw FormatError("unsupported feature file version " + std::to_string(version));
    }
    ModelTag model;
    model.name = get_string16(in, "model name");
    model.crop_size = get_uint<std::uint32_t>(in, "crop size");
    if (model.name.empty() || model.crop_size == 0) {
        throw FormatError("feature file has an empty model name or zero crop size");
    }
    const auto n = get_uint<std::uint64_t>(in, "row count");
    const auto d = get_uint<std::uint64_t>(in, "dimension");
    if (d == 0 || d > (std::uint64_t{1} << 31) || n > (std::uint64_t{1} << 31)) {
        throw FormatError("feature file declares an implausible shape");
    }
    auto manifest = get_ids(in, n);

    RowMatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        values.data()[i] = static_cast<double>(get_f32(in, "feature payload"));
    }
    expect_end(in);
    require_finite(values, "feature file payload");
    return FeatureMatrix(std::move(model), std::move(manifest), std::move(values));
}

FeatureMatrix read_feature_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open feature file '" + path + "'");
    }
    return read_feature_file(in);
}

} // namespace docret
