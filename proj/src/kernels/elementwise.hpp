#pragma once

// Per-element math cores shared by every kernel backend. Each core is a
// template over a small vector-ops trait; the scalar backend instantiates it
// with ScalarOps, SIMD backends with their register type. Because every
// backend runs the exact same operation sequence per element, results are
// bit-identical across backends (the project builds with -ffp-contract=off
// so the scalar instantiation cannot be fused into FMAs either).

#include <bit>
#include <cmath>
#include <cstdint>

#include "natboost/kernels.hpp"

namespace natboost::kernels::detail {

struct ScalarOps {
    using V = double;
    static V set1(double c) { return c; }
    static V add(V a, V b) { return a + b; }
    static V sub(V a, V b) { return a - b; }
    static V mul(V a, V b) { return a * b; }
    static V div(V a, V b) { return a / b; }
    static V max(V a, V b) { return a > b ? a : b; }
    static V min(V a, V b) { return a < b ? a : b; }
    static V floor(V a) { return std::floor(a); }
    // 2^n for integral-valued n in [-1022, 1023], via exponent bits.
    static V pow2i(V n) {
        const auto k = static_cast<std::int64_t>(n);
        return std::bit_cast<double>((k + 1023) << 52);
    }
};

// exp(x) after Cephes exp.c: argument reduction x = n*ln2 + r with a
// Cody-Waite split, then a degree-(2,3) rational approximation of exp(r) on
// |r| <= ln2/2, scaled by 2^n. Accurate to ~1 ulp. Inputs are saturated to
// [-708, 709] so the scaling never leaves the normal range.
template <class O, class V = typename O::V>
inline V exp_core(V x) {
    constexpr double kLog2E = 1.4426950408889634073599;
    constexpr double kLn2Hi = 6.93145751953125e-1;
    constexpr double kLn2Lo = 1.42860682030941723212e-6;
    constexpr double kP0 = 1.26177193074810590878e-4;
    constexpr double kP1 = 3.02994407707441961300e-2;
    constexpr double kP2 = 9.99999999999999999910e-1;
    constexpr double kQ0 = 3.00198505138664455042e-6;
    constexpr double kQ1 = 2.52448340349684104192e-3;
    constexpr double kQ2 = 2.27265548208155028766e-1;
    constexpr double kQ3 = 2.00000000000000000005e0;

    x = O::min(O::max(x, O::set1(-708.0)), O::set1(709.0));
    const V n = O::floor(O::add(O::mul(x, O::set1(kLog2E)), O::set1(0.5)));
    V r = O::sub(x, O::mul(n, O::set1(kLn2Hi)));
    r = O::sub(r, O::mul(n, O::set1(kLn2Lo)));
    const V rr = O::mul(r, r);
    const V p = O::mul(
        r, O::add(O::mul(O::add(O::mul(O::set1(kP0), rr), O::set1(kP1)), rr),
                  O::set1(kP2)));
    const V q = O::add(
        O::mul(O::add(O::mul(O::add(O::mul(O::set1(kQ0), rr), O::set1(kQ1)), rr),
                      O::set1(kQ2)),
               rr),
        O::set1(kQ3));
    const V e =
        O::add(O::set1(1.0), O::mul(O::set1(2.0), O::div(p, O::sub(q, p))));
    return O::mul(e, O::pow2i(n));
}

// exp(-2 * log_sigma) = 1 / sigma^2
template <class O, class V = typename O::V>
inline V inv_var_core(V log_sigma) {
    return exp_core<O>(O::mul(O::set1(-2.0), log_sigma));
}

// Per-example Normal NLL with log_sigma already clamped to the floor:
//   ls + 0.5*log(2*pi) + 0.5 * (y - mu)^2 * exp(-2*ls)
template <class O, class V = typename O::V>
inline V nll_core(V mu, V clamped_ls, V y) {
    const V iv = inv_var_core<O>(clamped_ls);
    const V d = O::sub(y, mu);
    return O::add(O::add(clamped_ls, O::set1(kHalfLog2Pi)),
                  O::mul(O::set1(0.5), O::mul(O::mul(d, d), iv)));
}

// d_ls = 1 - (mu - y)^2 * exp(-2*ls); shared by the plain and the natural
// gradient (the latter is exactly half of it).
template <class O, class V = typename O::V>
inline V grad_log_sigma_core(V mu, V ls, V y) {
    const V iv = inv_var_core<O>(ls);
    const V d = O::sub(mu, y);
    return O::sub(O::set1(1.0), O::mul(O::mul(d, d), iv));
}

// Gain of splitting a sorted block of n elements at boundary nl (left sum
// sl, total sum t). Algebraically equal to SSE(parent) - SSE(children) but
// written as a square so it is non-negative by construction and exactly zero
// for balanced sums.
template <class O, class V = typename O::V>
inline V split_gain_core(V sl, V nl, V nr, V nn, V t) {
    const V sr = O::sub(t, sl);
    const V num = O::sub(O::mul(nr, sl), O::mul(nl, sr));
    return O::div(O::mul(num, num), O::mul(O::mul(nn, nl), nr));
}

}  // namespace natboost::kernels::detail
