#include "natboost/boosting.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "natboost/kernels.hpp"

namespace natboost {

void BoostConfig::validate() const {
    if (!(learning_rate > 0.0)) throw Error("config: learning_rate must be > 0");
    if (max_leaves < 1) throw Error("config: max_leaves must be >= 1");
    if (min_samples_leaf < 1) throw Error("config: min_samples_leaf must be >= 1");
}

std::pair<double, double> fit_initial(std::span<const double> y) {
    if (y.size() < 2) throw Error("fit_initial: need at least 2 targets");
    const auto& k = kernels::active();
    const double n = static_cast<double>(y.size());
    const double mean = k.sum(y.data(), y.size()) / n;
    const double var = k.sum_sq_dev(y.data(), y.size(), mean) / n;
    const double sd = std::sqrt(var);
    return {mean, std::log(sd > 1e-6 ? sd : 1e-6)};
}

double line_search(const NormalParams& params, const GradPair& direction,
                   std::span<const double> y, std::size_t max_halvings) {
    if (direction.size() != params.size() ||
        direction.d_log_sigma.size() != params.size())
        throw Error("line_search: direction length mismatch");
    const auto& k = kernels::active();
    const double n = static_cast<double>(params.size());
    const double base = k.normal_nll(params.mu.data(), params.log_sigma.data(),
                                     y.data(), nullptr, params.size())
                            .sum /
                        n;
    for (std::size_t h = 0; h <= max_halvings; ++h) {
        const double rho = std::ldexp(1.0, -static_cast<int>(h));
        const double cand =
            k.normal_nll_stepped(params.mu.data(), params.log_sigma.data(),
                                 direction.d_mu.data(), direction.d_log_sigma.data(),
                                 rho, y.data(), params.size())
                .sum /
            n;
        if (cand < base) return rho;
    }
    return 0.0;
}

namespace {

RegressionTree grow_stage_tree(const Matrix& features, std::span<const double> target,
                               const BoostConfig& config,
                               const FeatureSortCache& cache) {
    if (config.growth_mode == GrowthMode::kLeafClipped)
        return grow_best_first(features, target, config.max_leaves,
                               config.min_samples_leaf, &cache);
    return grow_depth_wise(features, target, config.max_depth,
                           config.min_samples_leaf, &cache);
}

}  // namespace

BoostModel fit(const Dataset& train, const BoostConfig& config,
               const ScalerStats& scaler, const StageObserver& observer) {
    config.validate();
    const std::size_t n = train.n_rows();
    if (n < 2) throw Error("fit: need at least 2 training rows");

    BoostModel model;
    model.config = config;
    model.scaler = scaler;
    std::tie(model.mu0, model.log_sigma0) = fit_initial(train.targets);

    NormalParams params = NormalParams::constant(n, model.mu0, model.log_sigma0);
    const FeatureSortCache cache(train.features);
    const auto& k = kernels::active();

    GradPair direction;
    direction.d_mu.resize(n);
    direction.d_log_sigma.resize(n);
    std::vector<double> d_mu_target(n);
    std::vector<double> d_ls_target(n);

    model.stages.reserve(config.n_estimators);
    for (std::size_t stage = 0; stage < config.n_estimators; ++stage) {
        k.normal_natural_grad(params.mu.data(), params.log_sigma.data(),
                              train.targets.data(), d_mu_target.data(),
                              d_ls_target.data(), n);

        BoostStage s;
        s.mu_tree = grow_stage_tree(train.features, d_mu_target, config, cache);
        s.log_sigma_tree = grow_stage_tree(train.features, d_ls_target, config, cache);
        tree_predict(s.mu_tree, train.features, direction.d_mu);
        tree_predict(s.log_sigma_tree, train.features, direction.d_log_sigma);

        s.scaling = line_search(params, direction, train.targets,
                                config.line_search_max_halvings);
        if (s.scaling == 0.0) {
            warn("fit: early stop at stage " + std::to_string(stage) +
                 ": no scaling improves the training score");
            break;
        }

        const double step = -config.learning_rate * s.scaling;
        k.axpy(step, direction.d_mu.data(), params.mu.data(), n);
        k.axpy(step, direction.d_log_sigma.data(), params.log_sigma.data(), n);
        model.stages.push_back(std::move(s));
        if (observer) observer(model.stages.size(), params);
    }
    return model;
}

NormalParams predict_dist(const BoostModel& model, const Matrix& features,
                          std::optional<std::size_t> stages) {
    const std::size_t use = stages.value_or(model.stages.size());
    if (use > model.stages.size())
        throw Error("predict_dist: requested " + std::to_string(use) +
                    " stages, model has " + std::to_string(model.stages.size()));

    const std::size_t n = features.rows();
    NormalParams params = NormalParams::constant(n, model.mu0, model.log_sigma0);
    if (n == 0) return params;

    const auto& k = kernels::active();
    std::vector<double> pred(n);
    for (std::size_t t = 0; t < use; ++t) {
        const auto& s = model.stages[t];
        const double step = -model.config.learning_rate * s.scaling;
        tree_predict(s.mu_tree, features, pred);
        k.axpy(step, pred.data(), params.mu.data(), n);
        tree_predict(s.log_sigma_tree, features, pred);
        k.axpy(step, pred.data(), params.log_sigma.data(), n);
    }
    return params;
}

std::size_t select_stages(const BoostModel& model, const Dataset& validation) {
    const std::size_t n = validation.n_rows();
    if (n == 0) throw Error("select_stages: empty validation set");
    if (validation.n_features() != std::size_t(0) &&
        !model.stages.empty() &&
        validation.features.cols() == 0)
        throw Error("select_stages: validation features missing");

    const auto& k = kernels::active();
    NormalParams params = NormalParams::constant(n, model.mu0, model.log_sigma0);
    std::vector<double> pred(n);

    const auto mean_nll = [&]() {
        return k.normal_nll(params.mu.data(), params.log_sigma.data(),
                            validation.targets.data(), nullptr, n)
                   .sum /
               static_cast<double>(n);
    };

    double best = mean_nll();
    std::size_t best_m = 0;
    for (std::size_t t = 0; t < model.stages.size(); ++t) {
        const auto& s = model.stages[t];
        const double step = -model.config.learning_rate * s.scaling;
        tree_predict(s.mu_tree, validation.features, pred);
        k.axpy(step, pred.data(), params.mu.data(), n);
        tree_predict(s.log_sigma_tree, validation.features, pred);
        k.axpy(step, pred.data(), params.log_sigma.data(), n);
        const double score = mean_nll();
        if (score < best) {
            best = score;
            best_m = t + 1;
        }
    }
    return best_m;
}

namespace {

using nlohmann::json;

json tree_to_json(const RegressionTree& tree) {
    json nodes = json::array();
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) {
            nodes.push_back(json{{"value", node.value}});
        } else {
            nodes.push_back(json{{"feature", node.feature},
                                 {"threshold", node.threshold},
                                 {"left", node.left},
                                 {"right", node.right}});
        }
    }
    return nodes;
}

RegressionTree tree_from_json(const json& nodes, GrowthMode mode) {
    if (!nodes.is_array() || nodes.empty())
        throw DataError("model: tree node array missing or empty");
    RegressionTree tree;
    tree.growth_mode = mode;
    for (const auto& item : nodes) {
        TreeNode node;
        if (item.contains("value")) {
            node.value = item.at("value").get<double>();
        } else {
            node.feature = item.at("feature").get<std::int32_t>();
            node.threshold = item.at("threshold").get<double>();
            node.left = item.at("left").get<std::int32_t>();
            node.right = item.at("right").get<std::int32_t>();
            if (node.left < 0 || node.right < 0)
                throw DataError("model: internal node with negative child index");
        }
        tree.nodes.push_back(node);
    }
    validate_tree(tree);
    return tree;
}

std::string growth_mode_name(GrowthMode mode) {
    return mode == GrowthMode::kLeafClipped ? "leaf" : "depth";
}

GrowthMode growth_mode_from(const std::string& name) {
    if (name == "leaf") return GrowthMode::kLeafClipped;
    if (name == "depth") return GrowthMode::kDepthClipped;
    throw DataError("model: unknown growth mode '" + name + "'");
}

constexpr int kFormatVersion = 1;

}  // namespace

std::string model_to_json(const BoostModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["config"] = {
        {"learning_rate", model.config.learning_rate},
        {"n_estimators", model.config.n_estimators},
        {"max_leaves", model.config.max_leaves},
        {"min_samples_leaf", model.config.min_samples_leaf},
        {"growth_mode", growth_mode_name(model.config.growth_mode)},
        {"max_depth", model.config.max_depth},
        {"line_search_max_halvings", model.config.line_search_max_halvings},
    };
    j["scaler"] = {
        {"feature_means", model.scaler.feature_means},
        {"feature_stds", model.scaler.feature_stds},
        {"target_mean", model.scaler.target_mean},
        {"target_std", model.scaler.target_std},
    };
    j["initial"] = {{"mu", model.mu0}, {"log_sigma", model.log_sigma0}};
    json stages = json::array();
    for (const auto& s : model.stages) {
        stages.push_back(json{{"mu_tree", tree_to_json(s.mu_tree)},
                              {"log_sigma_tree", tree_to_json(s.log_sigma_tree)},
                              {"scaling", s.scaling}});
    }
    j["stages"] = std::move(stages);
    return j.dump();
}

BoostModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model: invalid JSON: ") + e.what());
    }
    try {
        if (!j.contains("format_version") || !j.at("format_version").is_number_integer())
            throw DataError("model: missing format_version");
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw DataError("model: unsupported format_version " +
                            j.at("format_version").dump() + " (expected " +
                            std::to_string(kFormatVersion) + ")");

        BoostModel model;
        const auto& cfg = j.at("config");
        model.config.learning_rate = cfg.at("learning_rate").get<double>();
        model.config.n_estimators = cfg.at("n_estimators").get<std::size_t>();
        model.config.max_leaves = cfg.at("max_leaves").get<std::size_t>();
        model.config.min_samples_leaf = cfg.at("min_samples_leaf").get<std::size_t>();
        model.config.growth_mode =
            growth_mode_from(cfg.at("growth_mode").get<std::string>());
        model.config.max_depth = cfg.at("max_depth").get<std::size_t>();
        model.config.line_search_max_halvings =
            cfg.at("line_search_max_halvings").get<std::size_t>();

        const auto& scaler = j.at("scaler");
        model.scaler.feature_means =
            scaler.at("feature_means").get<std::vector<double>>();
        model.scaler.feature_stds = scaler.at("feature_stds").get<std::vector<double>>();
        model.scaler.target_mean = scaler.at("target_mean").get<double>();
        model.scaler.target_std = scaler.at("target_std").get<double>();
        if (model.scaler.feature_means.size() != model.scaler.feature_stds.size())
            throw DataError("model: scaler mean/std length mismatch");

        model.mu0 = j.at("initial").at("mu").get<double>();
        model.log_sigma0 = j.at("initial").at("log_sigma").get<double>();

        for (const auto& s : j.at("stages")) {
            BoostStage stage;
            stage.mu_tree =
                tree_from_json(s.at("mu_tree"), model.config.growth_mode);
            stage.log_sigma_tree =
                tree_from_json(s.at("log_sigma_tree"), model.config.growth_mode);
            stage.scaling = s.at("scaling").get<double>();
            if (!(stage.scaling >= 0.0 && stage.scaling <= 1.0))
                throw DataError("model: stage scaling outside [0, 1]");
            model.stages.push_back(std::move(stage));
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("model: schema error: ") + e.what());
    }
}

void save_model(const BoostModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << model_to_json(model) << '\n';
    if (!out) throw DataError("failed while writing: " + path);
}

BoostModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

}  // namespace natboost
