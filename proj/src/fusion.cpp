#include "docret/fusion.hpp"

#include "docret/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace docret {

FusedMatrix fuse(const std::vector<FeatureMatrix>& matrices, const FusionWeights& weights)
{
    if (matrices.empty()) {
        throw ValidationError("fusion needs at least one feature matrix");
    }
    std::map<std::string, const FeatureMatrix*> by_name;
    for (const auto& m : matrices) {
        if (!by_name.emplace(m.model().name, &m).second) {
            throw ValidationError("model '" + m.model().name + "' appears twice in the fusion input");
        }
    }
    if (by_name.size() != weights.size()) {
        throw ValidationError("fusion weights cover " + std::to_string(weights.size())
                              + " models but " + std::to_string(by_name.size()) + " were given");
    }
    for (const auto& [name, m] : by_name) {
        if (!weights.contains(name)) {
            throw ValidationError("no fusion weight for model '" + name + "'");
        }
    }
    if (!(std::abs(weights.epsilon_sum() - 1.0) <= 1e-9)) {
        throw ValidationError("fusion coefficients do not sum to 1");
    }

    const FeatureMatrix& first = *by_name.begin()->second;
    std::uint32_t crop = 0;
    for (const auto& [name, m] : by_name) {
        if (m->dim() != first.dim()) {
            throw ValidationError("cannot fuse " + std::to_string(m->dim()) + "-D features of '"
                                  + name + "' with " + std::to_string(first.dim())
                                  + "-D features of '" + first.model().name + "'");
        }
        if (!(m->manifest() == first.manifest())) {
            throw AlignmentError("features of '" + name + "' and '" + first.model().name
                                 + "' are not aligned to the same manifest");
        }
        crop = std::max(crop, m->model().crop_size);
    }

    RowMatrixXd acc = RowMatrixXd::Zero(first.rows(), first.dim());
    bool started = false;
    for (const auto& [name, m] : by_name) {
        const double eps = weights.at(name).epsilon;
        if (!started) {
            acc = eps * m->values();
            started = true;
        } else {
            acc += eps * m->values();
        }
    }
    ModelTag tag{fused_model_name(weights), crop};
    return {FeatureMatrix(std::move(tag), first.manifest(), std::move(acc)), weights};
}

std::string fused_model_name(const FusionWeights& weights)
{
    std::string name = "fused(";
    bool first = true;
    for (const auto& [model, w] : weights.models()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", w.epsilon);
        name += (first ? "" : "+") + std::string(buf) + "*" + model;
        first = false;
    }
    return name + ")";
}

namespace {

const std::map<std::string, std::vector<std::string>>& presets()
{
    static const std::map<std::string, std::vector<std::string>> table{
        {"mmf", {"googlenet", "vggnet-d", "vggnet-e"}},
        {"mmf-1", {"alexnet", "vggnet-e"}},
        {"mmf-2", {"alexnet", "vggnet-d", "vggnet-e"}},
        {"mmf-3", {"alexnet", "googlenet"}},
        {"mmf-4", {"alexnet", "resnet-152"}},
    };
    return table;
}

} // namespace

std::optional<std::vector<std::string>> preset_models(const std::string& preset)
{
    std::string key = preset;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto it = presets().find(key);
    if (it == presets().end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const auto& [name, models] : presets()) {
        names.push_back(name);
    }
    return names;
}

} // namespace docret
