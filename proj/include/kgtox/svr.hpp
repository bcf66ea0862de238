#pragma once

#include "kgtox/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kgtox {

// exp(-gamma * ||x - x'||^2); throws on length mismatch.
double rbf_kernel(std::span<const double> x, std::span<const double> x_prime, double gamma);

struct SvrConfig {
    double C = 1.0;
    double gamma = 0.1;
    double epsilon = 0.1;      // insensitive-tube half width
    double tolerance = 1e-3;   // stop when the max KKT violation drops below this
    std::size_t max_iterations = 2'000'000;

    void validate() const;
};

// Dual solution in kernel space. beta[i] = alpha_i - alpha*_i.
struct SvrSolution {
    std::vector<double> beta;
    double bias = 0.0;
    double kkt_residual = 0.0; // max violation at the final iteration
    std::size_t iterations = 0;
};

// SMO over a precomputed kernel matrix; the working pair is the maximal
// KKT violator on each side of the equality constraint.
SvrSolution svr_solve_kernel(const Matrix& kernel, std::span<const double> targets,
                             const SvrConfig& config);

inline double predict_kernel_row(const SvrSolution& sol, std::span<const double> kernel_row) {
    double f = sol.bias;
    for (std::size_t i = 0; i < sol.beta.size(); ++i) f += sol.beta[i] * kernel_row[i];
    return f;
}

// Trained epsilon-SVR with an RBF kernel over explicit feature vectors.
struct SvrModel {
    Matrix support_vectors;                 // one row per retained vector
    std::vector<double> dual_coefficients;  // matching beta values
    double bias = 0.0;
    double gamma = 0.0;
    double C = 0.0;
    double epsilon = 0.0;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;

    double predict(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& xs) const;
};

SvrModel svr_fit(const Matrix& features, std::span<const double> targets,
                 const SvrConfig& config);

} // namespace kgtox
