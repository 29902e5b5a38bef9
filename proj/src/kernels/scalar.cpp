// Reference kernel backend: plain C++ implementations that define the exact
// arithmetic every other backend must reproduce bit-for-bit.

#include <cstddef>

#include "kernels/elementwise.hpp"
#include "natboost/kernels.hpp"

namespace natboost::kernels {
namespace {

using detail::ScalarOps;

double sum_impl(const double* x, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += x[i];
        acc1 += x[i + 1];
        acc2 += x[i + 2];
        acc3 += x[i + 3];
    }
    double s = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_sq_dev_impl(const double* x, std::size_t n, double center) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = x[i] - center;
        const double d1 = x[i + 1] - center;
        const double d2 = x[i + 2] - center;
        const double d3 = x[i + 3] - center;
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double s = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        s += d * d;
    }
    return s;
}

double sse_impl(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double s = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void exp_many_impl(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = detail::exp_core<ScalarOps>(x[i]);
}

NllSum normal_nll_impl(const double* mu, const double* log_sigma,
                       const double* y, double* per_example, std::size_t n) {
    NllSum result;
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    double block[4];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double ls = log_sigma[i + j];
            result.clamped += ls < kLogSigmaFloor;
            const double lsc = ScalarOps::max(ls, kLogSigmaFloor);
            block[j] = detail::nll_core<ScalarOps>(mu[i + j], lsc, y[i + j]);
            if (per_example) per_example[i + j] = block[j];
        }
        acc0 += block[0];
        acc1 += block[1];
        acc2 += block[2];
        acc3 += block[3];
    }
    double s = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) {
        const double ls = log_sigma[i];
        result.clamped += ls < kLogSigmaFloor;
        const double lsc = ScalarOps::max(ls, kLogSigmaFloor);
        const double v = detail::nll_core<ScalarOps>(mu[i], lsc, y[i]);
        if (per_example) per_example[i] = v;
        s += v;
    }
    result.sum = s;
    return result;
}

NllSum normal_nll_stepped_impl(const double* mu, const double* log_sigma,
                               const double* d_mu, const double* d_log_sigma,
                               double step, const double* y, std::size_t n) {
    NllSum result;
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    double block[4];
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double m = mu[i + j] - step * d_mu[i + j];
            const double ls = log_sigma[i + j] - step * d_log_sigma[i + j];
            result.clamped += ls < kLogSigmaFloor;
            const double lsc = ScalarOps::max(ls, kLogSigmaFloor);
            block[j] = detail::nll_core<ScalarOps>(m, lsc, y[i + j]);
        }
        acc0 += block[0];
        acc1 += block[1];
        acc2 += block[2];
        acc3 += block[3];
    }
    double s = (acc0 + acc1) + (acc2 + acc3);
    for (; i < n; ++i) {
        const double m = mu[i] - step * d_mu[i];
        const double ls = log_sigma[i] - step * d_log_sigma[i];
        result.clamped += ls < kLogSigmaFloor;
        const double lsc = ScalarOps::max(ls, kLogSigmaFloor);
        s += detail::nll_core<ScalarOps>(m, lsc, y[i]);
    }
    result.sum = s;
    return result;
}

void normal_grad_impl(const double* mu, const double* log_sigma,
                      const double* y, double* d_mu, double* d_log_sigma,
                      std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double iv = detail::inv_var_core<ScalarOps>(log_sigma[i]);
        const double d = mu[i] - y[i];
        d_mu[i] = d * iv;
        d_log_sigma[i] = detail::grad_log_sigma_core<ScalarOps>(mu[i], log_sigma[i], y[i]);
    }
}

void normal_natural_grad_impl(const double* mu, const double* log_sigma,
                              const double* y, double* d_mu,
                              double* d_log_sigma, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        d_mu[i] = mu[i] - y[i];
        d_log_sigma[i] =
            detail::grad_log_sigma_core<ScalarOps>(mu[i], log_sigma[i], y[i]) * 0.5;
    }
}

void axpy_impl(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

SplitScan split_scan_impl(const double* values, const double* resid,
                          std::size_t n, std::size_t min_leaf,
                          double* prefix_scratch) {
    SplitScan best;
    if (n < 2 * min_leaf || min_leaf == 0) return best;

    // Total in the same sequential order the prefix values use.
    prefix_scratch[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        prefix_scratch[i + 1] = prefix_scratch[i] + resid[i];
    const double total = prefix_scratch[n];
    const double nn = static_cast<double>(n);

    for (std::size_t i = min_leaf; i + min_leaf <= n; ++i) {
        if (values[i - 1] == values[i]) continue;
        const double sl = prefix_scratch[i];
        const double gain = detail::split_gain_core<ScalarOps>(
            sl, static_cast<double>(i), static_cast<double>(n - i), nn, total);
        if (gain > best.gain) {
            best.gain = gain;
            best.pos = i;
            best.left_sum = sl;
        }
    }
    return best;
}

constexpr Backend kScalarBackend = {
    "scalar",        sum_impl,
    sum_sq_dev_impl, sse_impl,
    exp_many_impl,   normal_nll_impl,
    normal_nll_stepped_impl, normal_grad_impl,
    normal_natural_grad_impl, axpy_impl,
    split_scan_impl,
};

}  // namespace

const Backend& scalar_backend() { return kScalarBackend; }

}  // namespace natboost::kernels
