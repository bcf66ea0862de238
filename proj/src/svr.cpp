#include "kgtox/svr.hpp"

#include "kgtox/errors.hpp"

#include <cmath>
#include <limits>

namespace kgtox {

double rbf_kernel(std::span<const double> x, std::span<const double> x_prime, double gamma) {
    if (x.size() != x_prime.size()) throw DomainError("rbf_kernel: length mismatch");
    return std::exp(-gamma * squared_distance(x, x_prime));
}

void SvrConfig::validate() const {
    if (!(C > 0.0)) throw ConfigError("C must be positive");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

// Variables t in [0, 2n): t < n is alpha_i (sign +1), t >= n is alpha*_i
// (sign -1), both boxed to [0, C], with sum_t sign_t * a_t = 0.
SvrSolution svr_solve_kernel(const Matrix& kernel, std::span<const double> targets,
                             const SvrConfig& config) {
    config.validate();
    const std::size_t n = targets.size();
    if (n < 2) throw DomainError("svr needs at least two samples");
    if (kernel.rows != n || kernel.cols != n) throw DomainError("kernel shape mismatch");
    for (double y : targets) {
        if (!std::isfinite(y)) throw DomainError("non-finite target");
    }
    for (double v : kernel.data) {
        if (!std::isfinite(v)) throw DomainError("non-finite kernel entry");
    }

    auto sign_of = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
    auto sample_of = [n](std::size_t t) { return t < n ? t : t - n; };

    std::vector<double> a(2 * n, 0.0);
    std::vector<double> grad(2 * n);
    for (std::size_t t = 0; t < 2 * n; ++t) {
        grad[t] = config.epsilon - sign_of(t) * targets[sample_of(t)];
    }

    SvrSolution sol;
    sol.beta.assign(n, 0.0);

    std::size_t iter = 0;
    double violation = std::numeric_limits<double>::infinity();
    while (true) {
        // maximal violating pair
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        std::size_t t_up = 2 * n, t_low = 2 * n;
        for (std::size_t t = 0; t < 2 * n; ++t) {
            const double s = sign_of(t);
            const double value = -s * grad[t];
            const bool can_increase = (s > 0.0 && a[t] < config.C) || (s < 0.0 && a[t] > 0.0);
            const bool can_decrease = (s > 0.0 && a[t] > 0.0) || (s < 0.0 && a[t] < config.C);
            if (can_increase && value > m_up) {
                m_up = value;
                t_up = t;
            }
            if (can_decrease && value < m_low) {
                m_low = value;
                t_low = t;
            }
        }
        violation = m_up - m_low;
        if (!(violation > config.tolerance) || t_up == 2 * n || t_low == 2 * n) {
            sol.bias = 0.5 * (m_up + m_low);
            break;
        }
        if (++iter > config.max_iterations) {
            throw ConvergenceError(config.max_iterations, "svr did not converge");
        }

        const std::size_t i = sample_of(t_up);
        const std::size_t j = sample_of(t_low);
        double quad = kernel.at(i, i) + kernel.at(j, j) - 2.0 * kernel.at(i, j);
        if (quad < 1e-12) quad = 1e-12;

        const double cap_up = sign_of(t_up) > 0.0 ? config.C - a[t_up] : a[t_up];
        const double cap_low = sign_of(t_low) > 0.0 ? a[t_low] : config.C - a[t_low];
        const double lambda = std::min({violation / quad, cap_up, cap_low});

        a[t_up] += sign_of(t_up) * lambda;
        a[t_low] -= sign_of(t_low) * lambda;
        sol.beta[i] += lambda;
        sol.beta[j] -= lambda;

        const auto k_i = kernel.row(i);
        const auto k_j = kernel.row(j);
        for (std::size_t t = 0; t < 2 * n; ++t) {
            const std::size_t st = sample_of(t);
            grad[t] += sign_of(t) * lambda * (k_i[st] - k_j[st]);
        }
    }

    sol.kkt_residual = std::max(violation, 0.0);
    sol.iterations = iter;
    return sol;
}

double SvrModel::predict(std::span<const double> x) const {
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.rows; ++i) {
        f += dual_coefficients[i] * rbf_kernel(x, support_vectors.row(i), gamma);
    }
    return f;
}

std::vector<double> SvrModel::predict(const Matrix& xs) const {
    std::vector<double> out(xs.rows);
    for (std::size_t r = 0; r < xs.rows; ++r) out[r] = predict(xs.row(r));
    return out;
}

SvrModel svr_fit(const Matrix& features, std::span<const double> targets,
                 const SvrConfig& config) {
    config.validate();
    if (features.rows != targets.size()) throw DomainError("feature/target count mismatch");
    if (features.rows < 2) throw DomainError("svr needs at least two samples");
    for (double v : features.data) {
        if (!std::isfinite(v)) throw DomainError("non-finite feature");
    }

    Matrix kernel(features.rows, features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
        kernel.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j < features.rows; ++j) {
            const double k = rbf_kernel(features.row(i), features.row(j), config.gamma);
            kernel.at(i, j) = k;
            kernel.at(j, i) = k;
        }
    }
    const SvrSolution sol = svr_solve_kernel(kernel, targets, config);

    SvrModel model;
    model.bias = sol.bias;
    model.gamma = config.gamma;
    model.C = config.C;
    model.epsilon = config.epsilon;
    model.kkt_residual = sol.kkt_residual;
    model.iterations = sol.iterations;

    std::size_t n_sv = 0;
    for (double b : sol.beta) n_sv += b != 0.0;
    model.support_vectors = Matrix(n_sv, features.cols);
    model.dual_coefficients.reserve(n_sv);
    std::size_t r = 0;
    for (std::size_t i = 0; i < sol.beta.size(); ++i) {
        if (sol.beta[i] == 0.0) continue;
        auto dst = model.support_vectors.row(r++);
        const auto src = features.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
        model.dual_coefficients.push_back(sol.beta[i]);
    }
    return model;
}

} // namespace kgtox
