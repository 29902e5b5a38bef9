#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "natboost/common.hpp"

namespace natboost {

// A loaded regression dataset: N examples, d features, one target per row.
// Immutable after construction; safe to share read-only across threads.
struct Dataset {
    Matrix features;                         // N x d, column-major
    std::vector<double> targets;             // length N
    std::vector<std::string> feature_names;  // length d

    std::size_t n_rows() const { return targets.size(); }
    std::size_t n_features() const { return features.cols(); }

    // Copy of the selected rows, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;
};

// Per-column standardization statistics fitted on a training fold.
struct ScalerStats {
    std::vector<double> feature_means;
    std::vector<double> feature_stds;  // strictly positive; 1.0 for constant columns
    double target_mean = 0.0;
    double target_std = 1.0;

    static ScalerStats identity(std::size_t n_features);
};

struct SplitSpec {
    double test_fraction = 0.1;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
};

// Loads a comma-separated file with an optional single header row
// (auto-detected). target selects the target column by header name or by
// zero-based index. Cells that do not parse raise DataError naming the
// offending row and column; rows whose cells parse to non-finite values
// (nan/inf/out-of-range) are dropped with a warning.
Dataset load_csv(const std::string& path, const std::string& target);

// Loads a feature-only CSV (no target column) for prediction.
struct FeatureTable {
    Matrix features;
    std::vector<std::string> feature_names;
};
FeatureTable load_feature_csv(const std::string& path);

// Means and population standard deviations over the given training rows.
// Columns with a single distinct value get std 1.0 and mean equal to that
// value, so they standardize to exact zeros.
ScalerStats fit_scaler(const Dataset& ds, std::span<const std::size_t> train_rows);

// (x - mean) / std per feature column and for the target. Returns a new
// dataset; the input is untouched.
Dataset apply_scaler(const Dataset& ds, const ScalerStats& stats);
Matrix standardize_features(const Matrix& features, const ScalerStats& stats);

// Deterministic three-way split. Sizes follow round-half-up on
// N*test_fraction, then round-half-up of the remainder times
// validation_fraction; each index list is returned sorted ascending.
SplitIndices split(const Dataset& ds, const SplitSpec& spec);

}  // namespace natboost
