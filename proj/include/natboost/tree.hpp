#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "natboost/common.hpp"

namespace natboost {

enum class GrowthMode : std::uint8_t {
    kLeafClipped,   // best-first growth bounded by a maximum leaf count
    kDepthClipped,  // level-wise growth bounded by a maximum depth
};

// Flat binary regression tree. nodes[0] is the root; a node is a leaf iff
// left < 0. Routing rule: go left iff x[feature] <= threshold.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;

    bool is_leaf() const { return left < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    GrowthMode growth_mode = GrowthMode::kLeafClipped;

    std::size_t leaf_count() const;
    std::size_t depth() const;  // 0 for a stump

    double predict_row(const Matrix& features, std::size_t row) const;
};

// A candidate split of one current leaf: the priority-queue element of
// best-first growth. gain is the SSE reduction of performing the split.
struct SplitCandidate {
    std::int32_t node = -1;
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

// Greedy best split of a single feature column. values must be sorted
// ascending with resid aligned to the same order. Thresholds are midpoints
// between consecutive distinct values (snapped down so that `<= threshold`
// reproduces the scanned partition exactly). Returns nullopt when no
// threshold has strictly positive gain.
struct ColumnSplit {
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
    double left_sum = 0.0;
};
std::optional<ColumnSplit> best_split(std::span<const double> sorted_values,
                                      std::span<const double> resid,
                                      std::size_t min_samples_leaf);

// Per-dataset argsort of every feature column, shared across all tree fits
// on the same feature matrix. Sort order is (value, row) ascending, so ties
// keep row order and growth is fully deterministic.
class FeatureSortCache {
public:
    explicit FeatureSortCache(const Matrix& features);
    std::span<const std::uint32_t> order(std::size_t feature) const {
        return {order_.data() + feature * n_rows_, n_rows_};
    }
    std::size_t n_rows() const { return n_rows_; }

private:
    std::size_t n_rows_ = 0;
    std::vector<std::uint32_t> order_;
};

// Best-first growth: repeatedly split the leaf with the globally largest
// gain until the tree has max_leaves leaves or no split improves. Ties on
// gain resolve by lowest feature index, then lowest threshold, then lowest
// node index.
RegressionTree grow_best_first(const Matrix& features, std::span<const double> residuals,
                               std::size_t max_leaves, std::size_t min_samples_leaf,
                               const FeatureSortCache* cache = nullptr);

// Level-wise growth: split every splittable node of the current depth until
// depth == max_depth or nothing improves. Same split criterion as best-first.
RegressionTree grow_depth_wise(const Matrix& features, std::span<const double> residuals,
                               std::size_t max_depth, std::size_t min_samples_leaf,
                               const FeatureSortCache* cache = nullptr);

std::vector<double> tree_predict(const RegressionTree& tree, const Matrix& features);
void tree_predict(const RegressionTree& tree, const Matrix& features,
                  std::span<double> out);

// Structural checks (binary shape, reachable nodes, leaf/internal counts);
// throws Error on violation. Used by tests and after deserialization.
void validate_tree(const RegressionTree& tree);

}  // namespace natboost
