#pragma once

#include <span>
#include <vector>

#include "natboost/common.hpp"

namespace natboost {

// Per-example Normal predictions in the (mean, log-scale) parametrization.
// sigma = exp(log_sigma) is positive by construction, which is what lets the
// boosting updates move freely in both coordinates.
struct NormalParams {
    std::vector<double> mu;
    std::vector<double> log_sigma;

    static NormalParams constant(std::size_t n, double mu0, double log_sigma0) {
        NormalParams p;
        p.mu.assign(n, mu0);
        p.log_sigma.assign(n, log_sigma0);
        return p;
    }
    std::size_t size() const { return mu.size(); }
};

// Per-example gradient (or natural gradient) in the same parametrization.
struct GradPair {
    std::vector<double> d_mu;
    std::vector<double> d_log_sigma;
    std::size_t size() const { return d_mu.size(); }
};

// 2x2 Fisher information of one example; off-diagonals are zero for the
// Normal in (mu, log sigma) coordinates.
struct Fisher2x2 {
    double m00 = 0.0;
    double m01 = 0.0;
    double m10 = 0.0;
    double m11 = 0.0;
};

// Per-example negative log-likelihood, in nats:
//   log sigma + 0.5*log(2*pi) + (y - mu)^2 / (2*sigma^2)
// sigma is floored at 1e-6 (standardized units); hitting the floor is logged.
std::vector<double> nll_score(const NormalParams& params, std::span<const double> y);

// Mean NLL over the batch (the training/selection score).
double nll_mean(const NormalParams& params, std::span<const double> y);

// d/d_mu = (mu - y)/sigma^2;  d/d_log_sigma = 1 - (y - mu)^2/sigma^2
GradPair nll_gradient(const NormalParams& params, std::span<const double> y);

// diag(1/sigma^2, 2) per example.
std::vector<Fisher2x2> fisher_information(const NormalParams& params);

// Inverse-Fisher-preconditioned gradient, in closed form:
//   d_mu = mu - y;  d_log_sigma = (1 - (y - mu)^2/sigma^2) / 2
GradPair natural_gradient(const NormalParams& params, std::span<const double> y);

// Total number of examples whose sigma hit the floor so far (process-wide).
std::size_t sigma_clamp_count();

}  // namespace natboost
