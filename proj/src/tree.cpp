#include "natboost/tree.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <queue>

#include "natboost/kernels.hpp"

namespace natboost {

std::size_t RegressionTree::leaf_count() const {
    std::size_t count = 0;
    for (const auto& node : nodes) count += node.is_leaf();
    return count;
}

std::size_t RegressionTree::depth() const {
    // Iterative depth: nodes always appear after their parent, so a single
    // forward pass suffices.
    std::vector<std::size_t> depth_of(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].is_leaf()) {
            deepest = std::max(deepest, depth_of[i]);
        } else {
            depth_of[static_cast<std::size_t>(nodes[i].left)] = depth_of[i] + 1;
            depth_of[static_cast<std::size_t>(nodes[i].right)] = depth_of[i] + 1;
        }
    }
    return deepest;
}

double RegressionTree::predict_row(const Matrix& features, std::size_t row) const {
    std::size_t node = 0;
    while (!nodes[node].is_leaf()) {
        const auto& n = nodes[node];
        node = features.at(row, static_cast<std::size_t>(n.feature)) <= n.threshold
                   ? static_cast<std::size_t>(n.left)
                   : static_cast<std::size_t>(n.right);
    }
    return nodes[node].value;
}

void tree_predict(const RegressionTree& tree, const Matrix& features,
                  std::span<double> out) {
    if (out.size() != features.rows())
        throw Error("tree_predict: output length mismatch");
    for (std::size_t r = 0; r < features.rows(); ++r)
        out[r] = tree.predict_row(features, r);
}

std::vector<double> tree_predict(const RegressionTree& tree, const Matrix& features) {
    std::vector<double> out(features.rows());
    tree_predict(tree, features, out);
    return out;
}

void validate_tree(const RegressionTree& tree) {
    if (tree.nodes.empty()) throw Error("tree: no nodes");
    const auto n = static_cast<std::int32_t>(tree.nodes.size());
    std::vector<int> parents(tree.nodes.size(), 0);
    std::size_t leaves = 0;
    std::size_t internal = 0;
    for (std::int32_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(i)];
        if (node.is_leaf()) {
            ++leaves;
            if (node.right >= 0) throw Error("tree: leaf with a right child");
            continue;
        }
        ++internal;
        if (node.left <= i || node.left >= n || node.right <= i || node.right >= n)
            throw Error("tree: child index out of range");
        if (node.left == node.right) throw Error("tree: duplicate child index");
        ++parents[static_cast<std::size_t>(node.left)];
        ++parents[static_cast<std::size_t>(node.right)];
    }
    if (leaves != internal + 1)
        throw Error("tree: leaf count " + std::to_string(leaves) +
                    " != internal count + 1 (" + std::to_string(internal + 1) + ")");
    if (parents[0] != 0) throw Error("tree: root has a parent");
    for (std::size_t i = 1; i < tree.nodes.size(); ++i)
        if (parents[i] != 1) throw Error("tree: node " + std::to_string(i) +
                                         " has " + std::to_string(parents[i]) +
                                         " parents");
}

FeatureSortCache::FeatureSortCache(const Matrix& features)
    : n_rows_(features.rows()), order_(features.rows() * features.cols()) {
    std::vector<std::uint32_t> idx(n_rows_);
    for (std::size_t f = 0; f < features.cols(); ++f) {
        const auto col = features.col(f);
        std::iota(idx.begin(), idx.end(), 0u);
        std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (col[a] != col[b]) return col[a] < col[b];
            return a < b;
        });
        std::copy(idx.begin(), idx.end(), order_.begin() + f * n_rows_);
    }
}

namespace {

// Midpoint of two consecutive distinct sorted values, snapped down to the
// lower value whenever rounding would otherwise land on the upper one, so
// `x <= threshold` routes exactly the rows the scan put on the left.
double snap_threshold(double lower, double upper) {
    const double mid = lower + 0.5 * (upper - lower);
    return mid < upper ? mid : lower;
}

struct NodeRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t count() const { return end - begin; }
};

// One candidate in the growth frontier. Ordering for the priority queue:
// gain desc, then feature asc, threshold asc, node asc — fully deterministic
// even for machine-level gain ties.
struct Candidate {
    SplitCandidate split;
    double left_sum = 0.0;
    std::size_t split_pos = 0;  // boundary position within the node's range
};

struct CandidateWorse {
    bool operator()(const Candidate& a, const Candidate& b) const {
        if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
        if (a.split.feature != b.split.feature) return a.split.feature > b.split.feature;
        if (a.split.threshold != b.split.threshold)
            return a.split.threshold > b.split.threshold;
        return a.split.node > b.split.node;
    }
};

class TreeGrower {
public:
    TreeGrower(const Matrix& features, std::span<const double> residuals,
               std::size_t min_samples_leaf, const FeatureSortCache* cache)
        : features_(features),
          residuals_(residuals),
          min_leaf_(min_samples_leaf),
          n_(features.rows()),
          d_(features.cols()) {
        if (n_ == 0 || residuals_.empty()) throw Error("tree: empty input");
        if (residuals_.size() != n_)
            throw Error("tree: residual length != feature row count");
        if (min_leaf_ == 0) throw Error("tree: min_samples_leaf must be >= 1");

        if (cache) {
            if (cache->n_rows() != n_) throw Error("tree: sort cache row mismatch");
            order_.resize(n_ * d_);
            for (std::size_t f = 0; f < d_; ++f) {
                const auto src = cache->order(f);
                std::copy(src.begin(), src.end(), order_.begin() + f * n_);
            }
        } else {
            const FeatureSortCache local(features);
            order_.resize(n_ * d_);
            for (std::size_t f = 0; f < d_; ++f) {
                const auto src = local.order(f);
                std::copy(src.begin(), src.end(), order_.begin() + f * n_);
            }
        }

        values_scratch_.resize(n_);
        resid_scratch_.resize(n_);
        prefix_scratch_.resize(n_ + 1);
        partition_scratch_.resize(n_);
        goes_left_.assign(n_, 0);
    }

    RegressionTree best_first(std::size_t max_leaves) {
        if (max_leaves == 0) throw Error("tree: max_leaves must be >= 1");
        RegressionTree tree;
        tree.growth_mode = GrowthMode::kLeafClipped;
        make_root(tree);

        std::priority_queue<Candidate, std::vector<Candidate>, CandidateWorse> frontier;
        if (max_leaves >= 2)
            if (auto cand = find_candidate(0)) frontier.push(*cand);

        std::size_t leaves = 1;
        while (leaves < max_leaves && !frontier.empty()) {
            const Candidate cand = frontier.top();
            frontier.pop();
            const auto [left, right] = apply_split(cand, tree);
            ++leaves;
            if (auto c = find_candidate(left)) frontier.push(*c);
            if (auto c = find_candidate(right)) frontier.push(*c);
        }
        return tree;
    }

    RegressionTree depth_wise(std::size_t max_depth) {
        RegressionTree tree;
        tree.growth_mode = GrowthMode::kDepthClipped;
        make_root(tree);

        std::vector<std::int32_t> level{0};
        for (std::size_t depth = 0; depth < max_depth && !level.empty(); ++depth) {
            std::vector<std::int32_t> next;
            for (const auto node : level) {
                const auto cand = find_candidate(node);
                if (!cand) continue;
                const auto [left, right] = apply_split(*cand, tree);
                next.push_back(left);
                next.push_back(right);
            }
            level = std::move(next);
        }
        return tree;
    }

private:
    void make_root(RegressionTree& tree) {
        const double total = kernels::active().sum(residuals_.data(), n_);
        TreeNode root;
        root.value = total / static_cast<double>(n_);
        tree.nodes.push_back(root);
        ranges_.assign(1, NodeRange{0, n_});
        sums_.assign(1, total);
    }

    std::span<std::uint32_t> node_order(std::size_t feature, const NodeRange& range) {
        return {order_.data() + feature * n_ + range.begin, range.count()};
    }

    std::optional<Candidate> find_candidate(std::int32_t node) {
        const NodeRange range = ranges_[static_cast<std::size_t>(node)];
        const std::size_t k = range.count();
        if (k < 2 * min_leaf_) return std::nullopt;

        // A node whose residuals are all identical cannot be improved; the
        // exact min==max test keeps rounding noise from manufacturing splits.
        {
            const auto rows = node_order(0, range);
            double lo = residuals_[rows[0]];
            double hi = lo;
            for (const auto row : rows) {
                const double r = residuals_[row];
                lo = r < lo ? r : lo;
                hi = r > hi ? r : hi;
            }
            if (lo == hi) return std::nullopt;
        }

        const auto& kernel = kernels::active();
        std::optional<Candidate> best;
        for (std::size_t f = 0; f < d_; ++f) {
            const auto rows = node_order(f, range);
            const auto col = features_.col(f);
            for (std::size_t i = 0; i < k; ++i) {
                values_scratch_[i] = col[rows[i]];
                resid_scratch_[i] = residuals_[rows[i]];
            }
            const auto scan =
                kernel.split_scan(values_scratch_.data(), resid_scratch_.data(), k,
                                  min_leaf_, prefix_scratch_.data());
            if (scan.pos == 0) continue;
            if (!best || scan.gain > best->split.gain) {
                Candidate cand;
                cand.split.node = node;
                cand.split.feature = static_cast<std::int32_t>(f);
                cand.split.threshold = snap_threshold(values_scratch_[scan.pos - 1],
                                                      values_scratch_[scan.pos]);
                cand.split.gain = scan.gain;
                cand.split.left_count = scan.pos;
                cand.split.right_count = k - scan.pos;
                cand.left_sum = scan.left_sum;
                cand.split_pos = scan.pos;
                best = cand;
            }
        }
        return best;
    }

    // Splits the candidate's node: repartitions every feature's order slice
    // and appends the two child leaves. Left membership is taken from the
    // scan position, not from a float comparison, so it matches the gains
    // exactly; the snapped threshold reproduces it at prediction time.
    std::pair<std::int32_t, std::int32_t> apply_split(const Candidate& cand,
                                                      RegressionTree& tree) {
        const auto node = static_cast<std::size_t>(cand.split.node);
        const NodeRange range = ranges_[node];
        const auto split_feature = static_cast<std::size_t>(cand.split.feature);

        {
            const auto rows = node_order(split_feature, range);
            for (std::size_t i = 0; i < rows.size(); ++i)
                goes_left_[rows[i]] = i < cand.split_pos;
        }
        for (std::size_t f = 0; f < d_; ++f) {
            const auto rows = node_order(f, range);
            std::size_t lo = 0;
            std::size_t hi = cand.split.left_count;
            for (const auto row : rows)
                partition_scratch_[goes_left_[row] ? lo++ : hi++] = row;
            std::copy(partition_scratch_.begin(),
                      partition_scratch_.begin() + static_cast<std::ptrdiff_t>(rows.size()),
                      rows.begin());
        }

        const double parent_sum = sums_[node];
        const double right_sum = parent_sum - cand.left_sum;

        const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
        const auto right_id = left_id + 1;
        TreeNode left_leaf;
        left_leaf.value = cand.left_sum / static_cast<double>(cand.split.left_count);
        TreeNode right_leaf;
        right_leaf.value = right_sum / static_cast<double>(cand.split.right_count);
        tree.nodes.push_back(left_leaf);
        tree.nodes.push_back(right_leaf);

        auto& parent = tree.nodes[node];
        parent.feature = cand.split.feature;
        parent.threshold = cand.split.threshold;
        parent.left = left_id;
        parent.right = right_id;

        ranges_.push_back(NodeRange{range.begin, range.begin + cand.split.left_count});
        ranges_.push_back(NodeRange{range.begin + cand.split.left_count, range.end});
        sums_.push_back(cand.left_sum);
        sums_.push_back(right_sum);
        return {left_id, right_id};
    }

    const Matrix& features_;
    std::span<const double> residuals_;
    const std::size_t min_leaf_;
    const std::size_t n_;
    const std::size_t d_;

    std::vector<std::uint32_t> order_;  // per-feature sorted rows, repartitioned
    std::vector<NodeRange> ranges_;     // per node, shared by all features
    std::vector<double> sums_;          // per node residual sum

    std::vector<double> values_scratch_;
    std::vector<double> resid_scratch_;
    std::vector<double> prefix_scratch_;
    std::vector<std::uint32_t> partition_scratch_;
    std::vector<std::uint8_t> goes_left_;
};

}  // namespace

std::optional<ColumnSplit> best_split(std::span<const double> sorted_values,
                                      std::span<const double> resid,
                                      std::size_t min_samples_leaf) {
    if (sorted_values.size() != resid.size())
        throw Error("best_split: value/residual length mismatch");
    if (min_samples_leaf == 0) throw Error("best_split: min_samples_leaf must be >= 1");
    if (!std::is_sorted(sorted_values.begin(), sorted_values.end()))
        throw Error("best_split: values must be sorted ascending");

    std::vector<double> prefix(sorted_values.size() + 1);
    const auto scan =
        kernels::active().split_scan(sorted_values.data(), resid.data(),
                                     sorted_values.size(), min_samples_leaf,
                                     prefix.data());
    if (scan.pos == 0) return std::nullopt;
    ColumnSplit out;
    out.threshold = snap_threshold(sorted_values[scan.pos - 1], sorted_values[scan.pos]);
    out.gain = scan.gain;
    out.left_count = scan.pos;
    out.right_count = sorted_values.size() - scan.pos;
    out.left_sum = scan.left_sum;
    return out;
}

RegressionTree grow_best_first(const Matrix& features, std::span<const double> residuals,
                               std::size_t max_leaves, std::size_t min_samples_leaf,
                               const FeatureSortCache* cache) {
    TreeGrower grower(features, residuals, min_samples_leaf, cache);
    return grower.best_first(max_leaves);
}

RegressionTree grow_depth_wise(const Matrix& features, std::span<const double> residuals,
                               std::size_t max_depth, std::size_t min_samples_leaf,
                               const FeatureSortCache* cache) {
    TreeGrower grower(features, residuals, min_samples_leaf, cache);
    return grower.depth_wise(max_depth);
}

}  // namespace natboost
