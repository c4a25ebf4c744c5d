#pragma once

#include "docret/calibration.hpp"
#include "docret/evaluation.hpp"
#include "docret/extraction.hpp"
#include "docret/feature_model.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace docret {

struct ModelConfig {
    ModelTag tag;
    nlohmann::json backend; // {"kind": "synthetic" | "file" | "neural", ...}
};

/// A named set of models evaluated together ("alexnet", "MMF-2", ...).
struct EvaluationConfig {
    std::string name;
    std::vector<std::string> models;
};

/**
 * Declarative experiment definition, read from a JSON file. Relative paths
 * resolve against the directory holding the file.
 *
 *   {
 *     "training_manifest": "train.txt",
 *     "query_manifest": "queries.txt",        (optional, else calibration queries)
 *     "calibration": "pairs.tsv",
 *     "target_dim": 256, "l2_normalize": true, "seed": 0,
 *     "preset": "mmf-2",                        (optional)
 *     "models": [ {"name": "alexnet", "crop_size": 256,
 *                  "backend": {"kind": "synthetic", "dim": 300,
 *                              "perturbations": "perturb.tsv"}} ],
 *     "evaluate": ["alexnet", "mmf-2", {"name": "mine", "models": ["a", "b"]}]
 *   }
 */
struct PipelineConfig {
    std::filesystem::path base_dir;
    std::filesystem::path training_manifest;
    std::optional<std::filesystem::path> query_manifest;
    std::filesystem::path calibration;
    std::vector<ModelConfig> models;
    Eigen::Index target_dim = 256;
    bool l2_normalize = true;
    std::uint64_t seed = 0;
    std::optional<std::string> preset;
    std::vector<EvaluationConfig> evaluate;

    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static PipelineConfig load(const std::filesystem::path& path);

    std::vector<std::string> model_names() const;
    /// Models fused by the index stage: the preset's models, else all.
    EvaluationConfig fusion_selection() const;
    /// Configurations evaluated: the explicit list, else every single model
    /// followed by the fusion selection.
    std::vector<EvaluationConfig> evaluation_configs() const;
    /// Resolves a model name or preset name against this config.
    EvaluationConfig resolve(const std::string& name) const;
};

std::unique_ptr<ExtractionBackend> make_backend(const ModelConfig& model, const PipelineConfig& config);

/// Output-directory layout shared by all stages.
struct Layout {
    std::filesystem::path root;

    std::filesystem::path features(const std::string& model, const std::string& split) const;
    std::filesystem::path pca(const std::string& model) const;
    std::filesystem::path reduced(const std::string& model, const std::string& split) const;
    std::filesystem::path weights() const;
    std::filesystem::path calibration_report() const;
    std::filesystem::path index(const std::string& name) const;
    std::filesystem::path index_queries(const std::string& name) const;
    std::filesystem::path report() const;
};

CorpusManifest training_manifest(const PipelineConfig& config);
CorpusManifest query_manifest(const PipelineConfig& config);

// Stages. Each reads its inputs from the layout (or the config), writes its
// outputs there, and returns human-readable warnings.

std::vector<std::string> run_extract(const PipelineConfig& config, const Layout& layout);
std::vector<std::string> run_reduce(const PipelineConfig& config, const Layout& layout);
std::vector<std::string> run_calibrate(const PipelineConfig& config, const Layout& layout);
std::vector<std::string> run_index(const PipelineConfig& config, const Layout& layout);
std::vector<std::string> run_evaluate(const PipelineConfig& config, const Layout& layout);

/// Loads reduced training and query features of one model.
ModelArtifacts load_artifacts(const Layout& layout, const std::string& model);

} // namespace docret
