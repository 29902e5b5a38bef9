// AVX2 kernel backend. Every kernel reproduces the scalar reference
// arithmetic exactly: the same blocked accumulator layout (one lane per
// scalar accumulator), the same shared elementwise cores, and scalar tails
// for the trailing elements. No FMA is used so lane arithmetic matches the
// contraction-free scalar build.
//
// This translation unit is the only one compiled with -mavx2; the CPU
// feature check lives in dispatch.cpp, which is compiled without it.

#include "natboost/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

#include "kernels/elementwise.hpp"

namespace natboost::kernels {
namespace {

using detail::ScalarOps;

struct Avx2Ops {
    using V = __m256d;
    static V set1(double c) { return _mm256_set1_pd(c); }
    static V add(V a, V b) { return _mm256_add_pd(a, b); }
    static V sub(V a, V b) { return _mm256_sub_pd(a, b); }
    static V mul(V a, V b) { return _mm256_mul_pd(a, b); }
    static V div(V a, V b) { return _mm256_div_pd(a, b); }
    static V max(V a, V b) { return _mm256_max_pd(a, b); }
    static V min(V a, V b) { return _mm256_min_pd(a, b); }
    static V floor(V a) { return _mm256_floor_pd(a); }
    static V pow2i(V n) {
        const __m128i k32 = _mm256_cvtpd_epi32(n);
        const __m256i k64 = _mm256_cvtepi32_epi64(k32);
        const __m256i bits =
            _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
        return _mm256_castsi256_pd(bits);
    }
};

// Combine the four accumulator lanes exactly like the scalar backend:
// (acc0 + acc1) + (acc2 + acc3).
double combine_lanes(__m256d acc) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum_impl(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = combine_lanes(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double sum_sq_dev_impl(const double* x, std::size_t n, double center) {
    const __m256d c = _mm256_set1_pd(center);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = combine_lanes(acc);
    for (; i < n; ++i) {
        const double d = x[i] - center;
        s += d * d;
    }
    return s;
}

double sse_impl(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = combine_lanes(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void exp_many_impl(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, detail::exp_core<Avx2Ops>(_mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = detail::exp_core<ScalarOps>(x[i]);
}

NllSum normal_nll_impl(const double* mu, const double* log_sigma,
                       const double* y, double* per_example, std::size_t n) {
    NllSum result;
    const __m256d floor_v = _mm256_set1_pd(kLogSigmaFloor);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ls = _mm256_loadu_pd(log_sigma + i);
        const __m256d below = _mm256_cmp_pd(ls, floor_v, _CMP_LT_OQ);
        result.clamped += static_cast<std::size_t>(
            __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(below))));
        const __m256d lsc = _mm256_max_pd(ls, floor_v);
        const __m256d v = detail::nll_core<Avx2Ops>(_mm256_loadu_pd(mu + i), lsc,
                                                    _mm256_loadu_pd(y + i));
        if (per_example) _mm256_storeu_pd(per_example + i, v);
        acc = _mm256_add_pd(acc, v);
    }
    double s = combine_lanes(acc);
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
    const __m256d floor_v = _mm256_set1_pd(kLogSigmaFloor);
    const __m256d step_v = _mm256_set1_pd(step);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_sub_pd(_mm256_loadu_pd(mu + i),
                                        _mm256_mul_pd(step_v, _mm256_loadu_pd(d_mu + i)));
        const __m256d ls =
            _mm256_sub_pd(_mm256_loadu_pd(log_sigma + i),
                          _mm256_mul_pd(step_v, _mm256_loadu_pd(d_log_sigma + i)));
        const __m256d below = _mm256_cmp_pd(ls, floor_v, _CMP_LT_OQ);
        result.clamped += static_cast<std::size_t>(
            __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(below))));
        const __m256d lsc = _mm256_max_pd(ls, floor_v);
        acc = _mm256_add_pd(
            acc, detail::nll_core<Avx2Ops>(m, lsc, _mm256_loadu_pd(y + i)));
    }
    double s = combine_lanes(acc);
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
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_loadu_pd(mu + i);
        const __m256d ls = _mm256_loadu_pd(log_sigma + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        const __m256d iv = detail::inv_var_core<Avx2Ops>(ls);
        const __m256d d = _mm256_sub_pd(m, yv);
        _mm256_storeu_pd(d_mu + i, _mm256_mul_pd(d, iv));
        _mm256_storeu_pd(d_log_sigma + i,
                         detail::grad_log_sigma_core<Avx2Ops>(m, ls, yv));
    }
    for (; i < n; ++i) {
        const double iv = detail::inv_var_core<ScalarOps>(log_sigma[i]);
        const double d = mu[i] - y[i];
        d_mu[i] = d * iv;
        d_log_sigma[i] =
            detail::grad_log_sigma_core<ScalarOps>(mu[i], log_sigma[i], y[i]);
    }
}

void normal_natural_grad_impl(const double* mu, const double* log_sigma,
                              const double* y, double* d_mu,
                              double* d_log_sigma, std::size_t n) {
    const __m256d half = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d m = _mm256_loadu_pd(mu + i);
        const __m256d ls = _mm256_loadu_pd(log_sigma + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(d_mu + i, _mm256_sub_pd(m, yv));
        _mm256_storeu_pd(
            d_log_sigma + i,
            _mm256_mul_pd(detail::grad_log_sigma_core<Avx2Ops>(m, ls, yv), half));
    }
    for (; i < n; ++i) {
        d_mu[i] = mu[i] - y[i];
        d_log_sigma[i] =
            detail::grad_log_sigma_core<ScalarOps>(mu[i], log_sigma[i], y[i]) * 0.5;
    }
}

void axpy_impl(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yv = _mm256_add_pd(
            _mm256_loadu_pd(y + i), _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

SplitScan split_scan_impl(const double* values, const double* resid,
                          std::size_t n, std::size_t min_leaf,
                          double* prefix_scratch) {
    SplitScan best;
    if (n < 2 * min_leaf || min_leaf == 0) return best;

    // Prefix sums stay sequential so every candidate sees the exact values
    // the scalar backend computes.
    prefix_scratch[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        prefix_scratch[i + 1] = prefix_scratch[i] + resid[i];
    const double total = prefix_scratch[n];
    const double nn = static_cast<double>(n);

    const std::size_t first = min_leaf;
    const std::size_t last = n - min_leaf;  // inclusive

    double best_gain = 0.0;
    std::size_t best_pos = 0;

    std::size_t i = first;
    if (last >= first && last - first + 1 >= 4) {
        const __m256d nn_v = _mm256_set1_pd(nn);
        const __m256d total_v = _mm256_set1_pd(total);
        const __m256d zero = _mm256_setzero_pd();
        __m256d idx = _mm256_set_pd(static_cast<double>(first + 3),
                                    static_cast<double>(first + 2),
                                    static_cast<double>(first + 1),
                                    static_cast<double>(first));
        const __m256d four = _mm256_set1_pd(4.0);
        __m256d lane_best = zero;
        __m256d lane_idx = zero;
        for (; i + 3 <= last; i += 4) {
            const __m256d sl = _mm256_loadu_pd(prefix_scratch + i);
            const __m256d nl = idx;
            const __m256d nr = _mm256_sub_pd(nn_v, nl);
            __m256d gain =
                detail::split_gain_core<Avx2Ops>(sl, nl, nr, nn_v, total_v);
            // Boundaries inside a run of equal values are not splits.
            const __m256d distinct = _mm256_cmp_pd(_mm256_loadu_pd(values + i - 1),
                                                   _mm256_loadu_pd(values + i),
                                                   _CMP_NEQ_OQ);
            gain = _mm256_and_pd(gain, distinct);
            const __m256d better = _mm256_cmp_pd(gain, lane_best, _CMP_GT_OQ);
            lane_best = _mm256_blendv_pd(lane_best, gain, better);
            lane_idx = _mm256_blendv_pd(lane_idx, idx, better);
            idx = _mm256_add_pd(idx, four);
        }
        alignas(32) double gains[4];
        alignas(32) double idxs[4];
        _mm256_store_pd(gains, lane_best);
        _mm256_store_pd(idxs, lane_idx);
        for (int lane = 0; lane < 4; ++lane) {
            if (gains[lane] > best_gain ||
                (gains[lane] == best_gain && best_gain > 0.0 &&
                 static_cast<std::size_t>(idxs[lane]) < best_pos)) {
                best_gain = gains[lane];
                best_pos = static_cast<std::size_t>(idxs[lane]);
            }
        }
    }
    for (; i <= last; ++i) {
        if (values[i - 1] == values[i]) continue;
        const double sl = prefix_scratch[i];
        const double gain = detail::split_gain_core<ScalarOps>(
            sl, static_cast<double>(i), static_cast<double>(n - i), nn, total);
        if (gain > best_gain) {
            best_gain = gain;
            best_pos = i;
        }
    }
    if (best_pos != 0) {
        best.pos = best_pos;
        best.gain = best_gain;
        best.left_sum = prefix_scratch[best_pos];
    }
    return best;
}

constexpr Backend kAvx2Backend = {
    "avx2",          sum_impl,
    sum_sq_dev_impl, sse_impl,
    exp_many_impl,   normal_nll_impl,
    normal_nll_stepped_impl, normal_grad_impl,
    normal_natural_grad_impl, axpy_impl,
    split_scan_impl,
};

}  // namespace

const Backend* avx2_backend_table() { return &kAvx2Backend; }

}  // namespace natboost::kernels

#else

namespace natboost::kernels {
const Backend* avx2_backend_table() { return nullptr; }
}  // namespace natboost::kernels

#endif
