#include "kgtox/forest.hpp"

#include "kgtox/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace kgtox {

namespace {

double subset_mean(std::span<const double> y, std::span<const std::size_t> rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += y[r];
    return s / static_cast<double>(rows.size());
}

} // namespace

std::int32_t RandomForestRegressor::grow(Tree& tree, const Matrix& x, std::span<const double> y,
                                         std::vector<std::size_t>& rows, std::size_t lo,
                                         std::size_t hi, Rng& rng, const ForestConfig& config) {
    const std::size_t n = hi - lo;
    const std::span<std::size_t> node_rows(rows.data() + lo, n);

    bool pure = true;
    for (std::size_t i = 1; i < n && pure; ++i) pure = y[node_rows[i]] == y[node_rows[0]];

    if (pure || n < config.min_samples_split) {
        Node leaf;
        leaf.value = subset_mean(y, node_rows);
        tree.push_back(leaf);
        return static_cast<std::int32_t>(tree.size() - 1);
    }

    const std::size_t d = x.cols;
    std::size_t m = config.max_features
                        ? config.max_features
                        : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(
                                                       static_cast<double>(d))));
    m = std::min(m, d);

    // partial Fisher-Yates for the feature subset
    std::vector<std::size_t> feature_pool(d);
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + rng.uniform_int(d - i);
        std::swap(feature_pool[i], feature_pool[j]);
    }

    double best_score = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, double>> vals(n); // (feature value, target)
    for (std::size_t fi = 0; fi < m; ++fi) {
        const std::size_t f = feature_pool[fi];
        for (std::size_t i = 0; i < n; ++i) {
            vals[i] = {x.at(node_rows[i], f), y[node_rows[i]]};
        }
        std::sort(vals.begin(), vals.end());
        if (vals.front().first == vals.back().first) continue;

        // prefix sums give SSE of both sides in O(1) per split point
        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (const auto& [v, t] : vals) {
            total_sum += t;
            total_sq += t * t;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += vals[i].second;
            left_sq += vals[i].second * vals[i].second;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            const double sse_left = left_sq - left_sum * left_sum / nl;
            const double sse_right =
                (total_sq - left_sq) - (total_sum - left_sum) * (total_sum - left_sum) / nr;
            const double score = sse_left + sse_right;
            if (score < best_score) {
                best_score = score;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
            }
        }
    }

    if (best_feature < 0) {
        Node leaf;
        leaf.value = subset_mean(y, node_rows);
        tree.push_back(leaf);
        return static_cast<std::int32_t>(tree.size() - 1);
    }

    const auto split_point = std::partition(
        rows.begin() + static_cast<std::ptrdiff_t>(lo), rows.begin() + static_cast<std::ptrdiff_t>(hi),
        [&](std::size_t r) {
            return x.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold;
        });
    const std::size_t mid = static_cast<std::size_t>(split_point - rows.begin());
    if (mid == lo || mid == hi) { // numerically degenerate split
        Node leaf;
        leaf.value = subset_mean(y, node_rows);
        tree.push_back(leaf);
        return static_cast<std::int32_t>(tree.size() - 1);
    }

    const std::int32_t self = static_cast<std::int32_t>(tree.size());
    tree.push_back({});
    tree[self].feature = best_feature;
    tree[self].threshold = best_threshold;
    const std::int32_t left = grow(tree, x, y, rows, lo, mid, rng, config);
    const std::int32_t right = grow(tree, x, y, rows, mid, hi, rng, config);
    tree[self].left = left;
    tree[self].right = right;
    return self;
}

void RandomForestRegressor::fit(const Matrix& x, std::span<const double> y,
                                const ForestConfig& config) {
    if (x.rows != y.size()) throw DomainError("forest: feature/target mismatch");
    if (x.rows == 0) throw DomainError("forest: empty training set");
    if (config.n_trees == 0) throw ConfigError("forest needs at least one tree");

    trees_.clear();
    trees_.resize(config.n_trees);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        Rng rng = Rng(config.seed).derive(0x74726565ULL + t);
        std::vector<std::size_t> rows(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) rows[i] = rng.uniform_int(x.rows);
        trees_[t].reserve(2 * x.rows);
        grow(trees_[t], x, y, rows, 0, rows.size(), rng, config);
    }
}

double RandomForestRegressor::predict_one(std::span<const double> x) const {
    if (trees_.empty()) throw DomainError("forest not fitted");
    double sum = 0.0;
    for (const Tree& tree : trees_) {
        std::int32_t node = 0; // the root is always pushed first
        while (tree[static_cast<std::size_t>(node)].feature >= 0) {
            const Node& nd = tree[static_cast<std::size_t>(node)];
            node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        sum += tree[static_cast<std::size_t>(node)].value;
    }
    return sum / static_cast<double>(trees_.size());
}

std::vector<double> RandomForestRegressor::predict(const Matrix& xs) const {
    std::vector<double> out(xs.rows);
    for (std::size_t r = 0; r < xs.rows; ++r) out[r] = predict_one(xs.row(r));
    return out;
}

} // namespace kgtox
