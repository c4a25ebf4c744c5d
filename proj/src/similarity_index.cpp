#include "docret/similarity_index.hpp"

#include "binary_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

namespace docret {

namespace {

Eigen::VectorXd row_norms(const RowMatrixXf& features)
{
    Eigen::VectorXd norms(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        norms(i) = detail::norm(features.row(i));
    }
    return norms;
}

} // namespace

RetrievalIndex RetrievalIndex::build(const FeatureMatrix& matrix)
{
    if (matrix.rows() < 1) {
        throw ValidationError("cannot index an empty feature matrix");
    }
    RetrievalIndex index;
    index.features_ = matrix.values().cast<float>();
    require_finite(index.features_, "index features (as float32)");
    index.ids_ = matrix.manifest();
    index.norms_ = row_norms(index.features_);
    for (Eigen::Index i = 0; i < index.norms_.size(); ++i) {
        if (!(index.norms_(i) > 0.0)) {
            throw ValidationError("image '" + index.ids_[static_cast<std::size_t>(i)].name
                                  + "' has a zero feature vector and cannot be indexed");
        }
    }
    return index;
}

std::vector<double> RetrievalIndex::scores(const Eigen::Ref<const Eigen::VectorXd>& q) const
{
    if (q.size() != dim()) {
        throw ValidationError("query has dimension " + std::to_string(q.size())
                              + " but the index holds " + std::to_string(dim()) + "-D features");
    }
    const double q_norm = detail::norm(q);
    if (!(q_norm > 0.0) || !std::isfinite(q_norm)) {
        throw ValidationError("query vector is zero or non-finite");
    }
    std::vector<double> out(static_cast<std::size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) {
        out[static_cast<std::size_t>(i)]
            = detail::clamp_unit(detail::dot(features_.row(i), q) / (norms_(i) * q_norm));
    }
    return out;
}

std::vector<RankedHit> RetrievalIndex::query(const Eigen::Ref<const Eigen::VectorXd>& q,
                                             std::size_t k) const
{
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    const auto sims = scores(q);
    std::vector<std::size_t> order(sims.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t keep = std::min(k, order.size());
    auto before = [&](std::size_t a, std::size_t b) {
        return ranks_before(sims[a], ids_[a], sims[b], ids_[b]);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      before);

    std::vector<RankedHit> hits;
    hits.reserve(keep);
    for (std::size_t r = 0; r < keep; ++r) {
        hits.push_back({ids_[order[r]], sims[order[r]], r + 1});
    }
    return hits;
}

std::size_t RetrievalIndex::rank_of(const Eigen::Ref<const Eigen::VectorXd>& q,
                                    const ImageId& target) const
{
    const auto t = ids_.index_of(target);
    if (!t) {
        throw ValidationError("image '" + target.name + "' is not in the index");
    }
    const auto sims = scores(q);
    std::size_t rank = 1;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        if (i != *t && ranks_before(sims[i], ids_[i], sims[*t], target)) {
            ++rank;
        }
    }
    return rank;
}

void write_index(const RetrievalIndex& index, std::ostream& out)
{
    using namespace detail;
    out.write("FCIX", 4);
    put_uint<std::uint16_t>(out, index_file_version);
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(index.dim()));
    put_uint<std::uint64_t>(out, static_cast<std::uint64_t>(index.size()));
    put_ids(out, index.ids());
    for (Eigen::Index i = 0; i < index.features().size(); ++i) {
        put_f32(out, index.features().data()[i]);
    }
    for (Eigen::Index i = 0; i < index.norms().size(); ++i) {
        put_f64(out, index.norms()(i));
    }
    if (!out) {
        throw IngestionError("failed writing index");
    }
}

void write_index(const RetrievalIndex& index, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IngestionError("cannot create '" + path + "'");
    }
    write_index(index, out);
}

RetrievalIndex read_index(std::istream& in)
{
    using namespace detail;
    expect_magic(in, "FCIX");
    const auto version = get_uint<std::uint16_t>(in, "version");
    if (version != index_file_version) {
        throw FormatError("unsupported index file version " + std::to_string(version));
    }
    const auto k = get_uint<std::uint64_t>(in, "dimension");
    const auto n = get_uint<std::uint64_t>(in, "row count");
    if (k == 0 || n == 0 || k > (std::uint64_t{1} << 31) || n > (std::uint64_t{1} << 31)) {
        throw FormatError("index file declares an implausible shape");
    }
    RetrievalIndex index;
    index.ids_ = get_ids(in, n);
    index.features_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < index.features_.size(); ++i) {
        index.features_.data()[i] = get_f32(in, "index features");
    }
    index.norms_.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < index.norms_.size(); ++i) {
        index.norms_(i) = get_f64(in, "index norms");
    }
    expect_end(in);
    require_finite(index.features_, "index features");
    const Eigen::VectorXd expected = row_norms(index.features_);
    for (Eigen::Index i = 0; i < expected.size(); ++i) {
        if (!(expected(i) > 0.0)
            || !(std::abs(expected(i) - index.norms_(i)) <= 1e-12 * expected(i))) {
            throw CorruptionError("index norm of '" + index.ids_[static_cast<std::size_t>(i)].name
                                  + "' does not match its feature row");
        }
    }
    return index;
}

RetrievalIndex read_index(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open index '" + path + "'");
    }
    return read_index(in);
}

void write_hits_tsv(const std::vector<RankedHit>& hits, std::ostream& out)
{
    char buf[64];
    for (const auto& hit : hits) {
        std::snprintf(buf, sizeof buf, "%.9f", hit.similarity);
        out << hit.rank << '\t' << hit.id.name << '\t' << buf << '\n';
    }
}

} // namespace docret
