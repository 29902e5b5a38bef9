#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "natboost/dataset.hpp"
#include "natboost/distribution.hpp"
#include "natboost/tree.hpp"

namespace natboost {

struct BoostConfig {
    double learning_rate = 0.04;
    std::size_t n_estimators = 500;
    std::size_t max_leaves = 31;
    std::size_t min_samples_leaf = 1;
    GrowthMode growth_mode = GrowthMode::kLeafClipped;
    std::size_t max_depth = 3;  // used only in depth-clipped mode
    std::size_t line_search_max_halvings = 16;

    void validate() const;
};

// One boosting stage: a tree per distribution parameter plus the shared
// line-search scaling.
struct BoostStage {
    RegressionTree mu_tree;
    RegressionTree log_sigma_tree;
    double scaling = 1.0;
};

// A fitted model: marginal initialization plus ordered stages. Updates are
//   params -= learning_rate * scaling * tree_output(x)
// with trees fitted to the natural gradient itself, so replaying a stage
// prefix reproduces the training trajectory bit for bit.
struct BoostModel {
    double mu0 = 0.0;
    double log_sigma0 = 0.0;
    std::vector<BoostStage> stages;
    ScalerStats scaler;  // identity unless the caller standardized
    BoostConfig config;
};

// Marginal Normal MLE of the targets: (mean, log of population std), with
// the std floored at 1e-6.
std::pair<double, double> fit_initial(std::span<const double> y);

// Largest scaling in {1, 1/2, ..., 2^-max_halvings} whose full step strictly
// improves the mean NLL; 0 when none does.
double line_search(const NormalParams& params, const GradPair& direction,
                   std::span<const double> y, std::size_t max_halvings);

// Called after every accepted stage with the updated training parameters.
using StageObserver = std::function<void(std::size_t stage, const NormalParams&)>;

// Natural-gradient boosting on a standardized training set. scaler is
// stored in the model for later de-standardization; pass
// ScalerStats::identity for raw-unit training.
BoostModel fit(const Dataset& train, const BoostConfig& config,
               const ScalerStats& scaler, const StageObserver& observer = nullptr);

// Predictions in standardized target units after the first `stages` updates
// (all stages when nullopt).
NormalParams predict_dist(const BoostModel& model, const Matrix& features,
                          std::optional<std::size_t> stages = std::nullopt);

// Number of stages minimizing mean validation NLL, evaluated at every prefix
// 0..stage_count in one incremental sweep. Ties go to the smaller prefix.
std::size_t select_stages(const BoostModel& model, const Dataset& validation);

// JSON round trip; loading a saved model reproduces its predictions bitwise.
void save_model(const BoostModel& model, const std::string& path);
BoostModel load_model(const std::string& path);

// In-memory variants of the model codec (used by the CLI and tests).
std::string model_to_json(const BoostModel& model);
BoostModel model_from_json(const std::string& text);

}  // namespace natboost
