#include "docret/pipeline.hpp"

#include "docret/errors.hpp"
#include "docret/feature_io.hpp"
#include "docret/fusion.hpp"
#include "docret/pca.hpp"
#include "docret/similarity_index.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace docret {

namespace {

using nlohmann::json;

fs::path resolve_path(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void check_model_name(const std::string& name)
{
    const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
    });
    if (!ok || name == "." || name == "..") {
        throw ValidationError("model name '" + name
                              + "' must be non-empty and use only letters, digits, '-', '_' or '.'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

std::string require_string(const json& j, const char* key, const char* where)
{
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ValidationError(std::string(where) + " needs a string '" + key + "'");
    }
    return j.at(key).get<std::string>();
}

std::string upper(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::ofstream create(const fs::path& path)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IngestionError("cannot create '" + path.string() + "'");
    }
    return out;
}

} // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir)
{
    if (!j.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    PipelineConfig c;
    c.base_dir = base_dir;
    c.training_manifest = resolve_path(base_dir, require_string(j, "training_manifest", "config"));
    c.calibration = resolve_path(base_dir, require_string(j, "calibration", "config"));
    if (j.contains("query_manifest")) {
        c.query_manifest = resolve_path(base_dir, require_string(j, "query_manifest", "config"));
    }
    const auto target = get_or<std::int64_t>(j, "target_dim", 256);
    if (target < 1) {
        throw ValidationError("target_dim must be at least 1");
    }
    c.target_dim = static_cast<Eigen::Index>(target);
    c.l2_normalize = get_or<bool>(j, "l2_normalize", true);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("preset")) {
        c.preset = require_string(j, "preset", "config");
    }

    if (!j.contains("models") || !j.at("models").is_array() || j.at("models").empty()) {
        throw ValidationError("config needs a non-empty 'models' array");
    }
    std::set<std::string> seen;
    for (const auto& m : j.at("models")) {
        ModelConfig mc;
        mc.tag.name = require_string(m, "name", "model entry");
        check_model_name(mc.tag.name);
        const auto crop = get_or<std::int64_t>(m, "crop_size", default_crop_size(mc.tag.name));
        if (crop < 1 || crop > std::numeric_limits<std::uint32_t>::max()) {
            throw ValidationError("model '" + mc.tag.name + "' needs a positive crop_size");
        }
        mc.tag.crop_size = static_cast<std::uint32_t>(crop);
        if (!m.contains("backend") || !m.at("backend").is_object()) {
            throw ValidationError("model '" + mc.tag.name + "' needs a 'backend' object");
        }
        mc.backend = m.at("backend");
        if (!seen.insert(mc.tag.name).second) {
            throw ValidationError("model '" + mc.tag.name + "' is listed twice");
        }
        c.models.push_back(std::move(mc));
    }

    if (j.contains("evaluate")) {
        for (const auto& e : j.at("evaluate")) {
            if (e.is_string()) {
                c.evaluate.push_back(c.resolve(e.get<std::string>()));
            } else if (e.is_object()) {
                EvaluationConfig ec;
                ec.name = require_string(e, "name", "evaluate entry");
                ec.models = get_or<std::vector<std::string>>(e, "models", {});
                c.evaluate.push_back(std::move(ec));
            } else {
                throw ValidationError("evaluate entries are names or {name, models} objects");
            }
        }
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError("cannot open config '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path());
}

std::vector<std::string> PipelineConfig::model_names() const
{
    std::vector<std::string> names;
    for (const auto& m : models) {
        names.push_back(m.tag.name);
    }
    return names;
}

EvaluationConfig PipelineConfig::resolve(const std::string& name) const
{
    for (const auto& m : models) {
        if (m.tag.name == name) {
            return {name, {name}};
        }
    }
    if (auto preset_set = preset_models(name)) {
        return {upper(name), *preset_set};
    }
    throw ValidationError("'" + name + "' is neither a configured model nor a known preset");
}

EvaluationConfig PipelineConfig::fusion_selection() const
{
    if (preset) {
        auto sel = resolve(*preset);
        std::transform(sel.name.begin(), sel.name.end(), sel.name.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        return sel;
    }
    return {"fused", model_names()};
}

std::vector<EvaluationConfig> PipelineConfig::evaluation_configs() const
{
    if (!evaluate.empty()) {
        return evaluate;
    }
    std::vector<EvaluationConfig> out;
    for (const auto& m : models) {
        out.push_back({m.tag.name, {m.tag.name}});
    }
    auto sel = fusion_selection();
    if (sel.models.size() > 1) {
        sel.name = preset ? upper(*preset) : "MMF";
        out.push_back(std::move(sel));
    }
    return out;
}

std::unique_ptr<ExtractionBackend> make_backend(const ModelConfig& model, const PipelineConfig& config)
{
    const json& b = model.backend;
    const std::string kind = require_string(b, "kind", ("backend of '" + model.tag.name + "'").c_str());
    if (kind == "synthetic") {
        SyntheticConfig sc;
        sc.dim = static_cast<Eigen::Index>(get_or<std::int64_t>(b, "dim", 64));
        sc.seed = get_or<std::uint64_t>(b, "seed", config.seed);
        sc.space = get_or<std::string>(b, "space", "");
        if (b.contains("perturbations")) {
            sc.perturbations = read_perturbation_file(
                resolve_path(config.base_dir, require_string(b, "perturbations", "synthetic backend"))
                    .string());
        }
        return std::make_unique<SyntheticBackend>(std::move(sc));
    }
    if (kind == "file") {
        std::vector<std::string> paths;
        for (const auto& p : get_or<std::vector<std::string>>(b, "paths", {})) {
            paths.push_back(resolve_path(config.base_dir, p).string());
        }
        if (b.contains("path")) {
            paths.push_back(resolve_path(config.base_dir, require_string(b, "path", "file backend")).string());
        }
        return std::make_unique<FileBackend>(std::move(paths));
    }
    if (kind == "neural") {
        NeuralConfig nc;
        nc.model_path = resolve_path(config.base_dir, require_string(b, "model", "neural backend")).string();
        nc.image_dir = resolve_path(config.base_dir, require_string(b, "images", "neural backend")).string();
        nc.output_layer = get_or<std::string>(b, "layer", "");
        nc.preprocess = PreprocessSpec::for_model(model.tag, get_or<bool>(b, "grayscale", false));
        nc.channel_mean = get_or<std::vector<float>>(b, "mean", nc.channel_mean);
        return make_neural_backend(std::move(nc));
    }
    throw ValidationError("unknown backend kind '" + kind + "' for model '" + model.tag.name + "'");
}

fs::path Layout::features(const std::string& model, const std::string& split) const
{
    return root / "features" / (model + "." + split + ".fcbf");
}

fs::path Layout::pca(const std::string& model) const
{
    return root / "pca" / (model + ".fcpc");
}

fs::path Layout::reduced(const std::string& model, const std::string& split) const
{
    return root / "reduced" / (model + "." + split + ".fcbf");
}

fs::path Layout::weights() const
{
    return root / "weights.tsv";
}

fs::path Layout::calibration_report() const
{
    return root / "calibration_report.tsv";
}

fs::path Layout::index(const std::string& name) const
{
    return root / "index" / (name + ".fcix");
}

fs::path Layout::index_queries(const std::string& name) const
{
    return root / "index" / (name + ".query.fcbf");
}

fs::path Layout::report() const
{
    return root / "report.tsv";
}

CorpusManifest training_manifest(const PipelineConfig& config)
{
    return read_manifest_file(config.training_manifest.string(), CorpusRole::training);
}

CorpusManifest query_manifest(const PipelineConfig& config)
{
    if (config.query_manifest) {
        return read_manifest_file(config.query_manifest->string(), CorpusRole::query);
    }
    return read_calibration_file(config.calibration.string()).query_manifest();
}

std::vector<std::string> run_extract(const PipelineConfig& config, const Layout& layout)
{
    const auto train = training_manifest(config);
    const auto queries = query_manifest(config);
    for (const auto& model : config.models) {
        const auto backend = make_backend(model, config);
        auto out_train = create(layout.features(model.tag.name, "train"));
        write_feature_file(extract(*backend, train, model.tag), out_train);
        auto out_query = create(layout.features(model.tag.name, "query"));
        write_feature_file(extract(*backend, queries, model.tag), out_query);
    }
    return {};
}

std::vector<std::string> run_reduce(const PipelineConfig& config, const Layout& layout)
{
    std::vector<std::string> warnings;
    for (const auto& model : config.models) {
        const auto& name = model.tag.name;
        const auto train = read_feature_file(layout.features(name, "train").string());
        const auto queries = read_feature_file(layout.features(name, "query").string());
        const PcaModel pca = fit(train, config.target_dim);
        if (pca.target_dim() < config.target_dim) {
            warnings.push_back("model '" + name + "': reduced to " + std::to_string(pca.target_dim())
                               + " dimensions instead of " + std::to_string(config.target_dim)
                               + " (limited by " + std::to_string(train.rows()) + " samples of "
                               + std::to_string(train.dim()) + "-D features)");
        }
        auto out_pca = create(layout.pca(name));
        write_pca_model(pca, out_pca);
        auto out_train = create(layout.reduced(name, "train"));
        write_feature_file(project(pca, train, config.l2_normalize), out_train);
        auto out_query = create(layout.reduced(name, "query"));
        write_feature_file(project(pca, queries, config.l2_normalize), out_query);
    }
    return warnings;
}

ModelArtifacts load_artifacts(const Layout& layout, const std::string& model)
{
    const auto train_path = layout.reduced(model, "train");
    const auto query_path = layout.reduced(model, "query");
    if (!fs::exists(train_path) || !fs::exists(query_path)) {
        throw ValidationError("model '" + model + "' has no reduced features under '"
                              + (layout.root / "reduced").string() + "'");
    }
    return {read_feature_file(train_path.string()), read_feature_file(query_path.string())};
}

std::vector<std::string> run_calibrate(const PipelineConfig& config, const Layout& layout)
{
    const auto calibration = read_calibration_file(config.calibration.string());
    if (calibration.empty()) {
        throw ValidationError("calibration file lists no pairs");
    }
    std::vector<std::string> warnings;
    std::vector<CalibrationRow> rows;
    std::map<std::string, double> rank_ages;
    for (const auto& model : config.models) {
        const auto art = load_artifacts(layout, model.tag.name);
        calibration.validate_against(art.training.manifest(), art.queries.manifest());
        const auto index = build_index(art.training);
        const auto ranks = rank_originals(index, calibration, art.queries);

        CalibrationRow row;
        row.model = model.tag.name;
        row.score = top_k_accuracy(ranks, 5);
        row.rank_age = rank_age(ranks);
        const auto acc = accuracy_row(row.model, ranks);
        row.top1 = acc.percent[0];
        row.top3 = acc.percent[1];
        row.top5 = acc.percent[2];
        row.top10 = acc.percent[3];
        rank_ages[row.model] = row.rank_age;
        rows.push_back(row);
    }
    const FusionWeights weights = coefficients(rank_ages);
    bool all_zero = true;
    for (auto& row : rows) {
        row.epsilon = weights.at(row.model).epsilon;
        all_zero = all_zero && row.rank_age == 0.0;
    }
    if (all_zero) {
        warnings.push_back("every model has Rank_age 0; falling back to uniform weights");
    }
    auto out_weights = create(layout.weights());
    write_weights(weights, out_weights);
    auto out_report = create(layout.calibration_report());
    write_calibration_report(rows, out_report);
    return warnings;
}

std::vector<std::string> run_index(const PipelineConfig& config, const Layout& layout)
{
    const auto selection = config.fusion_selection();
    const auto configured = config.model_names();
    for (const auto& m : selection.models) {
        if (std::find(configured.begin(), configured.end(), m) == configured.end()) {
            throw ValidationError("'" + selection.name + "' needs model '" + m
                                  + "', which is not configured");
        }
    }
    const FusionWeights all = read_weights_file(layout.weights().string());
    const FusionWeights weights = all.restrict_to(selection.models);

    std::vector<FeatureMatrix> training;
    std::vector<FeatureMatrix> queries;
    for (const auto& m : selection.models) {
        auto art = load_artifacts(layout, m);
        training.push_back(std::move(art.training));
        queries.push_back(std::move(art.queries));
    }
    const auto corpus = fuse(training, weights);
    auto out_index = create(layout.index(selection.name));
    write_index(build_index(corpus.matrix), out_index);
    auto out_queries = create(layout.index_queries(selection.name));
    write_feature_file(fuse(queries, weights).matrix, out_queries);
    return {};
}

std::vector<std::string> run_evaluate(const PipelineConfig& config, const Layout& layout)
{
    const auto truth = read_calibration_file(config.calibration.string());
    const FusionWeights all = read_weights_file(layout.weights().string());
    std::map<std::string, ModelArtifacts> cache;

    AccuracyReport report;
    for (const auto& ec : config.evaluation_configs()) {
        if (ec.models.empty()) {
            throw ValidationError("evaluation '" + ec.name + "' lists no models");
        }
        std::vector<ModelArtifacts> models;
        for (const auto& m : ec.models) {
            auto it = cache.find(m);
            if (it == cache.end()) {
                it = cache.emplace(m, load_artifacts(layout, m)).first;
            }
            models.push_back(it->second);
        }
        report.rows.push_back(
            evaluate_configuration(ec.name, models, all.restrict_to(ec.models), truth));
    }
    check_monotone(report);
    auto out = create(layout.report());
    write_report(report, out);
    return {};
}

} // namespace docret
