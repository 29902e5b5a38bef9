#pragma once

#include <cstddef>
#include <string_view>

namespace natboost::kernels {

// Result of a best-split scan over one sorted feature column.
// pos is the boundary index: left child takes sorted elements [0, pos),
// right child takes [pos, n). pos == 0 means no boundary with strictly
// positive gain exists.
struct SplitScan {
    std::size_t pos = 0;
    double gain = 0.0;       // SSE reduction, >= 0
    double left_sum = 0.0;   // residual sum of the left block at pos
};

// Sum of per-example Normal NLL terms plus how many examples hit the
// log-sigma floor while being scored.
struct NllSum {
    double sum = 0.0;
    std::size_t clamped = 0;
};

// Floor applied to log(sigma) whenever an NLL is evaluated, in standardized
// target units. Keeps degenerate fits from producing infinities.
// Value is log(1e-6).
inline constexpr double kLogSigmaFloor = -13.815510557964274;

// 0.5 * log(2 * pi), the constant term of the Normal NLL.
inline constexpr double kHalfLog2Pi = 0.9189385332046727;

// A kernel backend. All backends compute bit-identical results: the
// arithmetic (including summation blocking, the shared exp evaluation and
// the split-scan tie rules) is fixed, and SIMD variants implement the same
// operation sequence lane-wise. Equivalence is enforced by tests, so model
// training produces byte-identical artifacts regardless of the backend
// selected at runtime.
struct Backend {
    const char* name;

    // Deterministic blocked sum: four interleaved accumulators combined as
    // (a0 + a1) + (a2 + a3), then a sequential tail.
    double (*sum)(const double* x, std::size_t n);

    // Blocked sum of (x[i] - center)^2.
    double (*sum_sq_dev)(const double* x, std::size_t n, double center);

    // Blocked sum of (a[i] - b[i])^2.
    double (*sse)(const double* a, const double* b, std::size_t n);

    // out[i] = exp(x[i]). Arguments outside [-708, 709] saturate.
    void (*exp_many)(const double* x, double* out, std::size_t n);

    // Normal NLL with the log-sigma floor. per_example may be null; when
    // given it receives each example's NLL term.
    NllSum (*normal_nll)(const double* mu, const double* log_sigma,
                         const double* y, double* per_example, std::size_t n);

    // NLL of the stepped parameters (mu - step*d_mu, log_sigma - step*d_ls)
    // without materializing them. Used by the stage line search.
    NllSum (*normal_nll_stepped)(const double* mu, const double* log_sigma,
                                 const double* d_mu, const double* d_log_sigma,
                                 double step, const double* y, std::size_t n);

    // d_mu[i] = (mu - y) * exp(-2*ls);  d_ls[i] = 1 - (mu - y)^2 * exp(-2*ls)
    void (*normal_grad)(const double* mu, const double* log_sigma,
                        const double* y, double* d_mu, double* d_log_sigma,
                        std::size_t n);

    // Fisher-preconditioned gradient: d_mu[i] = mu - y; d_ls[i] as above / 2.
    void (*normal_natural_grad)(const double* mu, const double* log_sigma,
                                const double* y, double* d_mu,
                                double* d_log_sigma, std::size_t n);

    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    // Best SSE-reduction boundary over a feature column sorted ascending,
    // with residuals aligned to the sorted order. Boundaries are valid only
    // between distinct consecutive values and when both sides keep at least
    // min_leaf samples. Ties on gain resolve to the smallest boundary index.
    // prefix_scratch must hold n + 1 doubles.
    SplitScan (*split_scan)(const double* values, const double* resid,
                            std::size_t n, std::size_t min_leaf,
                            double* prefix_scratch);
};

// Plain C++ reference backend. Always available.
const Backend& scalar_backend();

// AVX2 backend, or nullptr when the build or the CPU does not support it.
const Backend* avx2_backend();

// Backend used by the rest of the library. Defaults to the best supported
// backend; the NATBOOST_KERNELS environment variable ("scalar", "avx2",
// "auto") overrides the default at startup.
const Backend& active();

// Select a backend by name ("scalar", "avx2", "auto"). Returns false if the
// requested backend is unavailable.
bool select(std::string_view name);

}  // namespace natboost::kernels
