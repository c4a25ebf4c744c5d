#include "docret/errors.hpp"
#include "docret/extraction.hpp"

#ifdef DOCRET_WITH_OPENCV
#include <opencv2/dnn.hpp>
#include <opencv2/imgcodecs.hpp>

#include <filesystem>
#include <mutex>
#endif

namespace docret {

#ifdef DOCRET_WITH_OPENCV

namespace {

Raster to_raster(const cv::Mat& bgr)
{
    cv::Mat image;
    bgr.convertTo(image, CV_32F);
    Raster r(image.cols, image.rows, image.channels());
    for (int y = 0; y < image.rows; ++y) {
        const float* src = image.ptr<float>(y);
        for (int x = 0; x < image.cols; ++x) {
            for (int c = 0; c < image.channels(); ++c) {
                // OpenCV decodes as BGR; rasters are RGB
                const int from = image.channels() >= 3 && c < 3 ? 2 - c : c;
                r.at(x, y, c) = src[x * image.channels() + from];
            }
        }
    }
    return r;
}

class NeuralBackend final : public ExtractionBackend {
public:
    explicit NeuralBackend(NeuralConfig config) : config_(std::move(config))
    {
        try {
            net_ = cv::dnn::readNetFromONNX(config_.model_path);
        } catch (const cv::Exception& e) {
            throw IngestionError("cannot load network '" + config_.model_path + "': " + e.what());
        }
        if (net_.empty()) {
            throw IngestionError("network '" + config_.model_path + "' is empty");
        }
    }

    FeatureMatrix extract_rows(const CorpusManifest& manifest, const ModelTag& model) const override
    {
        if (config_.preprocess.crop_size != model.crop_size) {
            throw ValidationError("neural backend crop size does not match model '" + model.name + "'");
        }
        RowMatrixXd values;
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            const Eigen::VectorXd f = features_for(manifest[i]);
            if (i == 0) {
                values.resize(static_cast<Eigen::Index>(manifest.size()), f.size());
            } else if (f.size() != values.cols()) {
                throw ValidationError("network output size changed between images");
            }
            values.row(static_cast<Eigen::Index>(i)) = f.transpose();
        }
        if (manifest.empty()) {
            // dimension is only known after a forward pass
            throw ValidationError("neural backend cannot infer the feature dimension of an empty manifest");
        }
        return FeatureMatrix(model, manifest, std::move(values));
    }

    std::string kind() const override { return "neural"; }

private:
    std::filesystem::path locate(const ImageId& id) const
    {
        for (const auto& ext : config_.extensions) {
            const auto p = std::filesystem::path(config_.image_dir) / (id.name + ext);
            if (std::filesystem::exists(p)) {
                return p;
            }
        }
        throw IngestionError("no readable image for '" + id.name + "' in '" + config_.image_dir + "'");
    }

    Eigen::VectorXd features_for(const ImageId& id) const
    {
        const cv::Mat decoded = cv::imread(locate(id).string(), cv::IMREAD_COLOR);
        if (decoded.empty()) {
            throw IngestionError("cannot decode image '" + id.name + "'");
        }
        const Raster r = preprocess(to_raster(decoded), config_.preprocess);
        const int size = static_cast<int>(config_.preprocess.crop_size);
        const int blob_shape[] = {1, r.channels, size, size};
        cv::Mat blob(4, blob_shape, CV_32F);
        float* dst = blob.ptr<float>();
        for (int c = 0; c < r.channels; ++c) {
            const float mean = c < static_cast<int>(config_.channel_mean.size()) ? config_.channel_mean[c] : 0.f;
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    *dst++ = r.at(x, y, c) - mean;
                }
            }
        }
        cv::Mat out;
        {
            // cv::dnn::Net is not re-entrant
            std::lock_guard lock(mutex_);
            net_.setInput(blob);
            out = config_.output_layer.empty() ? net_.forward() : net_.forward(config_.output_layer);
        }
        const cv::Mat flat = out.reshape(1, 1);
        Eigen::VectorXd f(flat.cols);
        for (int i = 0; i < flat.cols; ++i) {
            f(i) = flat.at<float>(0, i);
        }
        return f;
    }

    NeuralConfig config_;
    mutable cv::dnn::Net net_;
    mutable std::mutex mutex_;
};

} // namespace

bool neural_backend_available()
{
    return true;
}

std::unique_ptr<ExtractionBackend> make_neural_backend(NeuralConfig config)
{
    return std::make_unique<NeuralBackend>(std::move(config));
}

#else

bool neural_backend_available()
{
    return false;
}

std::unique_ptr<ExtractionBackend> make_neural_backend(NeuralConfig)
{
    throw ValidationError("this build has no neural-inference backend (configure with DOCRET_WITH_OPENCV=ON)");
}

#endif

} // namespace docret
