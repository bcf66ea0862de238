#pragma once

#include "kgtox/matrix.hpp"
#include "kgtox/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace kgtox {

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t min_samples_split = 2;
    std::size_t max_features = 0; // 0 = floor(sqrt(d))
    std::uint64_t seed = 0;
};

// Bagged regression trees: bootstrap of size n per tree, variance-reduction
// splits over a random sqrt(d) feature subset, grown to purity. Prediction
// is the mean over trees.
class RandomForestRegressor {
public:
    void fit(const Matrix& x, std::span<const double> y, const ForestConfig& config);
    double predict_one(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& xs) const;
    std::size_t n_trees() const { return trees_.size(); }

private:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    std::int32_t grow(Tree& tree, const Matrix& x, std::span<const double> y,
                      std::vector<std::size_t>& rows, std::size_t lo, std::size_t hi,
                      Rng& rng, const ForestConfig& config);

    std::vector<Tree> trees_;
};

} // namespace kgtox
