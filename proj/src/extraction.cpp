#include "docret/extraction.hpp"

#include "docret/errors.hpp"
#include "docret/feature_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace docret {

namespace {

Raster resize_bilinear(const Raster& src, int width, int height)
{
    Raster dst(width, height, src.channels);
    const double sx = static_cast<double>(src.width) / width;
    const double sy = static_cast<double>(src.height) / height;
    for (int y = 0; y < height; ++y) {
        // half-pixel centres
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < src.channels; ++c) {
                const double top = (1 - wx) * src.at(x0, y0, c) + wx * src.at(x1, y0, c);
                const double bottom = (1 - wx) * src.at(x0, y1, c) + wx * src.at(x1, y1, c);
                dst.at(x, y, c) = static_cast<float>((1 - wy) * top + wy * bottom);
            }
        }
    }
    return dst;
}

Raster to_gray(const Raster& src)
{
    if (src.channels == 1) {
        return src;
    }
    if (src.channels != 3 && src.channels != 4) {
        throw IngestionError("cannot convert a " + std::to_string(src.channels)
                             + "-channel image to grayscale");
    }
    Raster dst(src.width, src.height, 1);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            dst.at(x, y, 0) = static_cast<float>(0.299 * src.at(x, y, 0) + 0.587 * src.at(x, y, 1)
                                                 + 0.114 * src.at(x, y, 2));
        }
    }
    return dst;
}

// 53 random mantissa bits mapped onto [-1, 1)
double unit_symmetric(std::mt19937_64& gen)
{
    return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
}

Eigen::VectorXd draw_stream(std::uint64_t key, Eigen::Index dim)
{
    std::mt19937_64 gen(key);
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v[i] = unit_symmetric(gen);
    }
    return v;
}

} // namespace

Raster preprocess(const Raster& image, const PreprocessSpec& spec)
{
    if (image.width <= 0 || image.height <= 0 || image.channels <= 0) {
        throw IngestionError("image has a zero dimension");
    }
    if (image.pixels.size() != std::size_t(image.width) * image.height * image.channels) {
        throw IngestionError("image pixel buffer does not match its dimensions");
    }
    if (spec.crop_size == 0) {
        throw ValidationError("crop size must be positive");
    }
    const int crop = static_cast<int>(spec.crop_size);

    Raster work = spec.grayscale ? to_gray(image) : image;
    const int shorter = std::min(work.width, work.height);
    if (shorter != crop) {
        const double scale = static_cast<double>(crop) / shorter;
        const int w = work.width == shorter
            ? crop : std::max(crop, static_cast<int>(std::lround(work.width * scale)));
        const int h = work.height == shorter
            ? crop : std::max(crop, static_cast<int>(std::lround(work.height * scale)));
        work = resize_bilinear(work, w, h);
    }

    const int x0 = (work.width - crop) / 2;
    const int y0 = (work.height - crop) / 2;
    Raster out(crop, crop, work.channels);
    for (int y = 0; y < crop; ++y) {
        for (int x = 0; x < crop; ++x) {
            for (int c = 0; c < work.channels; ++c) {
                out.at(x, y, c) = work.at(x0 + x, y0 + y, c);
            }
        }
    }
    return out;
}

std::uint64_t synthetic_hash(const ImageId& id, const ModelTag& model, std::uint64_t seed,
                             std::uint64_t stream)
{
    // FNV-1a over a length-delimited encoding of the key
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    auto mix_u64 = [&mix](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            mix(static_cast<unsigned char>(v >> (8 * i)));
        }
    };
    auto mix_str = [&](const std::string& s) {
        mix_u64(s.size());
        for (const char c : s) {
            mix(static_cast<unsigned char>(c));
        }
    };
    mix_str(id.name);
    mix_str(model.name);
    mix_u64(seed);
    mix_u64(stream);
    return h;
}

Eigen::VectorXd synthetic_features(const ImageId& id, const ModelTag& model, Eigen::Index dim,
                                   std::uint64_t seed)
{
    if (dim <= 0) {
        throw ValidationError("synthetic feature dimension must be positive");
    }
    return draw_stream(synthetic_hash(id, model, seed, 0), dim);
}

Eigen::VectorXd perturbed_features(const ImageId& id, const ImageId& base, double target_cosine,
                                   const ModelTag& model, Eigen::Index dim, std::uint64_t seed,
                                   const std::string& base_space)
{
    if (!(target_cosine >= -1.0 && target_cosine <= 1.0)) {
        throw ValidationError("target cosine must lie in [-1, 1]");
    }
    const ModelTag base_model = base_space.empty() ? model : ModelTag{base_space, model.crop_size};
    Eigen::VectorXd b = synthetic_features(base, base_model, dim, seed);
    if (target_cosine == 1.0) {
        return b;
    }
    if (target_cosine == -1.0) {
        return -b;
    }
    if (dim < 2) {
        throw ValidationError("a 1-dimensional vector cannot be perturbed to cosine "
                              + std::to_string(target_cosine));
    }
    const double b_norm = b.norm();
    const Eigen::VectorXd b_unit = b / b_norm;

    // Redraw until the noise has a usable component orthogonal to the base.
    Eigen::VectorXd ortho;
    for (std::uint64_t stream = 1;; ++stream) {
        Eigen::VectorXd noise = draw_stream(synthetic_hash(id, model, seed, stream), dim);
        ortho = noise - noise.dot(b_unit) * b_unit;
        if (ortho.norm() > 1e-6 * noise.norm()) {
            break;
        }
    }
    ortho.normalize();

    const double sine = std::sqrt(std::max(0.0, 1.0 - target_cosine * target_cosine));
    Eigen::VectorXd v = b_norm * (target_cosine * b_unit + sine * ortho);
    const double peak = v.cwiseAbs().maxCoeff();
    if (peak > 1.0) {
        v /= peak;
    }
    return v;
}

FeatureMatrix extract(const ExtractionBackend& backend, const CorpusManifest& manifest,
                      const ModelTag& model)
{
    FeatureMatrix out = backend.extract_rows(manifest, model);
    if (!(out.manifest() == manifest)) {
        throw ValidationError(backend.kind() + " backend returned rows out of manifest order");
    }
    return out;
}

FileBackend::FileBackend(std::vector<std::string> paths)
{
    std::vector<FeatureMatrix> sources;
    for (const auto& p : paths) {
        sources.push_back(read_feature_file(p));
    }
    *this = FileBackend(std::move(sources));
}

FileBackend::FileBackend(std::vector<FeatureMatrix> sources)
{
    if (sources.empty()) {
        throw ValidationError("file backend needs at least one feature file");
    }
    if (sources.size() == 1) {
        merged_ = std::move(sources.front());
        return;
    }
    const Eigen::Index dim = sources.front().dim();
    std::vector<ImageId> ids;
    Eigen::Index total = 0;
    for (const auto& s : sources) {
        if (s.dim() != dim) {
            throw ValidationError("feature files for one model disagree on dimension ("
                                  + std::to_string(dim) + " vs " + std::to_string(s.dim()) + ")");
        }
        ids.insert(ids.end(), s.manifest().images().begin(), s.manifest().images().end());
        total += s.rows();
    }
    CorpusManifest manifest(ids); // rejects ids present in two files
    RowMatrixXd values(total, dim);
    for (const auto& s : sources) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            values.row(static_cast<Eigen::Index>(*manifest.index_of(s.manifest()[i]))) = s.row(i);
        }
    }
    merged_ = FeatureMatrix(sources.front().model(), std::move(manifest), std::move(values));
}

FeatureMatrix FileBackend::extract_rows(const CorpusManifest& manifest, const ModelTag& model) const
{
    const FeatureMatrix aligned = align(merged_, manifest);
    return FeatureMatrix(model, manifest, aligned.values());
}

std::map<ImageId, Perturbation> read_perturbations(std::istream& in)
{
    std::map<ImageId, Perturbation> table;
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
        std::istringstream fields(line);
        std::string query, base, cosine;
        if (!std::getline(fields, query, '\t') || !std::getline(fields, base, '\t')
            || !std::getline(fields, cosine)) {
            throw FormatError("perturbation line " + std::to_string(line_no)
                              + " is not 'query<TAB>base<TAB>cosine'");
        }
        Perturbation p{ImageId(base), 0.0};
        try {
            std::size_t used = 0;
            p.target_cosine = std::stod(cosine, &used);
            if (used != cosine.size()) {
                throw std::invalid_argument(cosine);
            }
        } catch (const std::exception&) {
            throw FormatError("perturbation line " + std::to_string(line_no)
                              + " has an invalid cosine '" + cosine + "'");
        }
        if (!table.emplace(ImageId(query), p).second) {
            throw ValidationError("duplicate perturbation for '" + query + "'");
        }
    }
    return table;
}

std::map<ImageId, Perturbation> read_perturbation_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open perturbation table '" + path + "'");
    }
    return read_perturbations(in);
}

SyntheticBackend::SyntheticBackend(SyntheticConfig config) : config_(std::move(config))
{
    if (config_.dim <= 0) {
        throw ValidationError("synthetic backend dimension must be positive");
    }
    for (const auto& [id, p] : config_.perturbations) {
        if (!(p.target_cosine >= -1.0 && p.target_cosine <= 1.0)) {
            throw ValidationError("perturbation of '" + id.name + "' has cosine outside [-1, 1]");
        }
    }
}

FeatureMatrix SyntheticBackend::extract_rows(const CorpusManifest& manifest,
                                             const ModelTag& model) const
{
    RowMatrixXd values(static_cast<Eigen::Index>(manifest.size()), config_.dim);
    const ModelTag base_model = config_.space.empty() ? model : ModelTag{config_.space, model.crop_size};
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const ImageId& id = manifest[i];
        const auto row = static_cast<Eigen::Index>(i);
        if (const auto it = config_.perturbations.find(id); it != config_.perturbations.end()) {
            values.row(row) = perturbed_features(id, it->second.base, it->second.target_cosine,
                                                 model, config_.dim, config_.seed, config_.space)
                                  .transpose();
        } else {
            values.row(row) = synthetic_features(id, base_model, config_.dim, config_.seed).transpose();
        }
    }
    return FeatureMatrix(model, manifest, std::move(values));
}

} // namespace docret
