#include "natboost/distribution.hpp"

#include <atomic>
#include <cmath>

#include "natboost/kernels.hpp"

namespace natboost {
namespace {

std::atomic<std::size_t> g_clamp_count{0};

void note_clamps(std::size_t clamped) {
    if (clamped == 0) return;
    const std::size_t before = g_clamp_count.fetch_add(clamped);
    if (before == 0)
        warn("sigma clamped to the 1e-6 floor while scoring (further clamps "
             "are counted, not logged)");
}

void check_params(const NormalParams& params) {
    if (params.mu.size() != params.log_sigma.size())
        throw Error("NormalParams: mu and log_sigma lengths differ");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!std::isfinite(params.mu[i]) || !std::isfinite(params.log_sigma[i]))
            throw Error("NormalParams: non-finite parameter at index " +
                        std::to_string(i));
}

void check_lengths(const NormalParams& params, std::span<const double> y) {
    if (params.size() != y.size())
        throw Error("distribution: params have " + std::to_string(params.size()) +
                    " examples but y has " + std::to_string(y.size()));
    for (const double v : y)
        if (!std::isfinite(v)) throw Error("distribution: non-finite target value");
}

}  // namespace

std::vector<double> nll_score(const NormalParams& params, std::span<const double> y) {
    check_params(params);
    check_lengths(params, y);
    std::vector<double> per_example(params.size());
    const auto result =
        kernels::active().normal_nll(params.mu.data(), params.log_sigma.data(),
                                     y.data(), per_example.data(), params.size());
    note_clamps(result.clamped);
    return per_example;
}

double nll_mean(const NormalParams& params, std::span<const double> y) {
    check_params(params);
    check_lengths(params, y);
    const auto result = kernels::active().normal_nll(
        params.mu.data(), params.log_sigma.data(), y.data(), nullptr, params.size());
    note_clamps(result.clamped);
    return result.sum / static_cast<double>(params.size());
}

GradPair nll_gradient(const NormalParams& params, std::span<const double> y) {
    check_params(params);
    check_lengths(params, y);
    GradPair g;
    g.d_mu.resize(params.size());
    g.d_log_sigma.resize(params.size());
    kernels::active().normal_grad(params.mu.data(), params.log_sigma.data(), y.data(),
                                  g.d_mu.data(), g.d_log_sigma.data(), params.size());
    return g;
}

std::vector<Fisher2x2> fisher_information(const NormalParams& params) {
    check_params(params);
    const std::size_t n = params.size();
    std::vector<double> neg2ls(n);
    for (std::size_t i = 0; i < n; ++i) neg2ls[i] = -2.0 * params.log_sigma[i];
    std::vector<double> inv_var(n);
    kernels::active().exp_many(neg2ls.data(), inv_var.data(), n);

    std::vector<Fisher2x2> fisher(n);
    for (std::size_t i = 0; i < n; ++i) fisher[i] = {inv_var[i], 0.0, 0.0, 2.0};
    return fisher;
}

GradPair natural_gradient(const NormalParams& params, std::span<const double> y) {
    check_params(params);
    check_lengths(params, y);
    GradPair g;
    g.d_mu.resize(params.size());
    g.d_log_sigma.resize(params.size());
    kernels::active().normal_natural_grad(params.mu.data(), params.log_sigma.data(),
                                          y.data(), g.d_mu.data(),
                                          g.d_log_sigma.data(), params.size());
    return g;
}

std::size_t sigma_clamp_count() { return g_clamp_count.load(); }

}  // namespace natboost
