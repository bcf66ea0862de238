#pragma once

#include "kgtox/effects.hpp"
#include "kgtox/grouping.hpp"
#include "kgtox/matrix.hpp"
#include "kgtox/rng.hpp"
#include "kgtox/svr.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kgtox {

// 1 - SS_res / SS_tot on the -log10 targets. Constant y is an error.
double r_squared(std::span<const double> y, std::span<const double> y_hat);

// Mean of 1 / (1 + |c - c_hat|) over the four toxicity categories.
double categorical_accuracy(std::span<const int> true_cats, std::span<const int> pred_cats);

struct GridSearchConfig {
    int exp_min = -4; // C and gamma both sweep 10^k, k in [exp_min, exp_max]
    int exp_max = 4;
    std::size_t inner_folds = 3;
    double epsilon = 0.1;
    double tolerance = 1e-3;
    std::size_t max_iterations = 300'000;
};

struct GridChoice {
    double C = 1.0;
    double gamma = 1.0;
    double mean_r2 = 0.0;
    std::size_t candidates_tried = 0;
    std::size_t candidates_converged = 0;
};

// Exhaustive sweep of the exponent grid; picks the candidate with the best
// mean inner-validation R-squared, ties to smaller C then smaller gamma.
// `squared_dist` is the pairwise squared-distance matrix of the training
// rows and `inner_fold_of` assigns each row to an inner fold.
GridChoice grid_search(const Matrix& squared_dist, std::span<const double> targets,
                       std::span<const std::size_t> inner_fold_of,
                       const GridSearchConfig& config);

// Convenience overload building a random inner split internally.
GridChoice grid_search(const Matrix& features, std::span<const double> targets,
                       const GridSearchConfig& config, Rng& rng);

struct ProtocolConfig {
    std::size_t n_repeats = 100;
    std::size_t n_folds = 5;
    double epsilon = 0.1;
    int grid_exp_min = -4;
    int grid_exp_max = 4;
    std::size_t inner_folds = 3;
    std::uint64_t seed = 0;
    std::size_t max_redraws = 10;
    double svr_tolerance = 1e-3;
    std::size_t svr_max_iterations = 300'000;
    std::size_t threads = 0; // 0 = hardware concurrency

    void validate() const;
};

struct RepeatMetrics {
    double r2 = 0.0;
    double ca = 0.0;
};

struct SampleOutcome {
    NodeId chemical = 0;
    NodeId species = 0;
    double true_target = 0.0;
    double mean_prediction = 0.0;
    double abs_error = 0.0;
    int true_category = 0;
    int predicted_category = 0;
    int categorical_error = 0; // |true - predicted|, from the averaged prediction
};

struct EvaluationReport {
    std::string feature_source;
    std::vector<RepeatMetrics> per_repeat;
    double r2_mean = 0.0;
    double r2_std = 0.0;
    double ca_mean = 0.0;
    double ca_std = 0.0;
    std::vector<SampleOutcome> per_sample;
    std::size_t redraws = 0;

    std::string to_json() const;
    std::string per_sample_csv(const KnowledgeGraph& kg) const;
};

using FeatureMap = std::map<NodeId, std::vector<double>>;

// Grouped 5-fold out-of-fold evaluation repeated n_repeats times with fresh
// random fold plans; inner grid search per training split; per-sample
// predictions averaged over repeats. Samples inherit the group of their
// species or chemical according to the assignment's kind.
EvaluationReport run_protocol(const std::vector<AggregatedSample>& samples,
                              const FeatureMap& features, const GroupAssignment& groups,
                              const ProtocolConfig& config, const std::string& source_name);

// Predicted toxicity category from a predicted -log10(mg/L) target.
int category_of_target(double target);

} // namespace kgtox
