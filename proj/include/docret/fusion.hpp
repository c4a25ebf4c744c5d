#pragma once

#include "docret/calibration.hpp"
#include "docret/feature_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace docret {

struct FusedMatrix {
    FeatureMatrix matrix;
    FusionWeights weights;
};

/**
 * Weighted-average fusion: row i of the result is sum_m epsilon_m * row i of
 * matrix m. Inputs must share dimension and manifest, and the weights must
 * cover exactly the input models. Terms are summed in model-name order, so
 * the result does not depend on the order of `matrices`.
 */
FusedMatrix fuse(const std::vector<FeatureMatrix>& matrices, const FusionWeights& weights);

/// "fused(0.75*alexnet+0.25*vggnet-e)"
std::string fused_model_name(const FusionWeights& weights);

/// Model sets of the named fusion configurations ("mmf", "mmf-1" .. "mmf-4").
std::optional<std::vector<std::string>> preset_models(const std::string& preset);
std::vector<std::string> preset_names();

} // namespace docret
