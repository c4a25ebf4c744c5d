#pragma once

#include "docret/feature_model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace docret {

/// Interleaved (row-major, channel-last) raster with float samples.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> pixels;

    Raster() = default;
    Raster(int w, int h, int c) : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c) {}

    float& at(int x, int y, int c) { return pixels[(std::size_t(y) * width + x) * channels + c]; }
    float at(int x, int y, int c) const { return pixels[(std::size_t(y) * width + x) * channels + c]; }

    friend bool operator==(const Raster&, const Raster&) = default;
};

enum class ResizePolicy { shorter_side_then_center_crop };

struct PreprocessSpec {
    std::uint32_t crop_size = 256;
    bool grayscale = false;
    ResizePolicy resize_policy = ResizePolicy::shorter_side_then_center_crop;

    static PreprocessSpec for_model(const ModelTag& model, bool grayscale = false)
    {
        return {model.crop_size, grayscale, ResizePolicy::shorter_side_then_center_crop};
    }
};

/**
 * Brings an image to crop_size x crop_size: bilinear resize so the shorter
 * side equals crop_size (skipped when it already does), then a centred crop.
 * Grayscale conversion uses ITU-R BT.601 luma weights.
 *
 * Throws IngestionError on a zero-dimension image.
 */
Raster preprocess(const Raster& image, const PreprocessSpec& spec);

/// Stable 64-bit hash of (id, model name, seed) driving all synthetic draws.
std::uint64_t synthetic_hash(const ImageId& id, const ModelTag& model, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// Deterministic pseudo-random feature vector with entries in [-1, 1].
Eigen::VectorXd synthetic_features(const ImageId& id, const ModelTag& model, Eigen::Index dim,
                                   std::uint64_t seed);

/**
 * Vector whose cosine to `base`'s synthetic vector equals `target_cosine`
 * (up to rounding). The orthogonal component is drawn from a stream keyed
 * on `id`, so distinct ids perturbing the same base get independent noise.
 * A target of 1 returns the base vector itself. Entries stay in [-1, 1].
 *
 * The base vector is drawn under `base_space` when it is given, otherwise
 * under the model name; the noise always uses the model name.
 */
Eigen::VectorXd perturbed_features(const ImageId& id, const ImageId& base, double target_cosine,
                                   const ModelTag& model, Eigen::Index dim, std::uint64_t seed,
                                   const std::string& base_space = {});

/// Abstract source of per-model feature matrices over a manifest.
class ExtractionBackend {
public:
    virtual ~ExtractionBackend() = default;

    /// Produces a matrix aligned to `manifest`. Must be deterministic and
    /// safe to call concurrently.
    virtual FeatureMatrix extract_rows(const CorpusManifest& manifest, const ModelTag& model) const = 0;
    virtual std::string kind() const = 0;
};

/// Runs the backend and checks alignment and dimension invariants.
FeatureMatrix extract(const ExtractionBackend& backend, const CorpusManifest& manifest,
                      const ModelTag& model);

/// Serves rows out of one or more interchange files.
class FileBackend final : public ExtractionBackend {
public:
    explicit FileBackend(std::vector<std::string> paths);
    explicit FileBackend(std::vector<FeatureMatrix> sources);

    FeatureMatrix extract_rows(const CorpusManifest& manifest, const ModelTag& model) const override;
    std::string kind() const override { return "file"; }

private:
    FeatureMatrix merged_;
};

struct Perturbation {
    ImageId base;
    double target_cosine = 1.0;
};

struct SyntheticConfig {
    Eigen::Index dim = 64;
    std::uint64_t seed = 0;
    /// query id -> (base id, cosine to base)
    std::map<ImageId, Perturbation> perturbations;
    /// Models naming the same space share their unperturbed vectors and
    /// differ only in query noise. Empty means the model's own space.
    std::string space;
};

/// Reads "query<TAB>base<TAB>target_cosine" lines.
std::map<ImageId, Perturbation> read_perturbations(std::istream& in);
std::map<ImageId, Perturbation> read_perturbation_file(const std::string& path);

class SyntheticBackend final : public ExtractionBackend {
public:
    explicit SyntheticBackend(SyntheticConfig config);

    FeatureMatrix extract_rows(const CorpusManifest& manifest, const ModelTag& model) const override;
    std::string kind() const override { return "synthetic"; }

    const SyntheticConfig& config() const { return config_; }

private:
    SyntheticConfig config_;
};

struct NeuralConfig {
    std::string model_path;   // ONNX network
    std::string image_dir;
    std::string output_layer; // empty: the network's default output
    PreprocessSpec preprocess;
    /// Per-channel mean subtracted after preprocessing (0-255 scale).
    std::vector<float> channel_mean{123.675f, 116.28f, 103.53f};
    std::vector<std::string> extensions{".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"};
};

/// True when the library was built with the OpenCV DNN backend.
bool neural_backend_available();

/// Throws ValidationError when neural_backend_available() is false.
std::unique_ptr<ExtractionBackend> make_neural_backend(NeuralConfig config);

} // namespace docret
