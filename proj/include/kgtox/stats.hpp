#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kgtox {

double mean(std::span<const double> xs);

// Population standard deviation (divide by n, not n-1).
double population_std(std::span<const double> xs);

// Median; even-length input averages the two middle values.
double median(std::vector<double> xs);

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
    bool defined = false; // false when either side has zero variance or n < 3
};

// Pearson correlation with a two-sided p-value from the t-transform
// t = r * sqrt((n-2) / (1-r^2)).
Correlation pearson(std::span<const double> x, std::span<const double> y);

// Regularized incomplete beta function I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with nu degrees of freedom.
double student_t_two_sided_p(double t, double nu);

// Area under the ROC curve for scores of positive vs negative items,
// rank-based with midrank tie handling.
double auc(std::span<const double> positive_scores, std::span<const double> negative_scores);

} // namespace kgtox
