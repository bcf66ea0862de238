#include "kgtox/stats.hpp"

#include "kgtox/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kgtox {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("median of empty sequence");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

namespace {

// Continued fraction for the incomplete beta (Lentz's algorithm).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double nu) {
    if (!std::isfinite(t)) return 0.0;
    const double x = nu / (nu + t * t);
    return incomplete_beta(0.5 * nu, 0.5, x);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    Correlation out;
    if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) return out;

    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return out;

    out.defined = true;
    out.r = sxy / std::sqrt(sxx * syy);
    out.r = std::clamp(out.r, -1.0, 1.0);
    const double nu = static_cast<double>(n - 2);
    const double denom = 1.0 - out.r * out.r;
    if (denom <= 0.0) {
        out.p_value = 0.0;
    } else {
        const double t = out.r * std::sqrt(nu / denom);
        out.p_value = student_t_two_sided_p(t, nu);
    }
    return out;
}

double auc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
    if (positive_scores.empty() || negative_scores.empty()) {
        throw DomainError("auc: both score lists must be nonempty");
    }
    // Mann-Whitney: rank all scores, midranks on ties.
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> items;
    items.reserve(positive_scores.size() + negative_scores.size());
    for (double s : positive_scores) items.push_back({s, true});
    for (double s : negative_scores) items.push_back({s, false});
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.score < b.score; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j < items.size() && items[j].score == items[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (items[k].positive) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double n_pos = static_cast<double>(positive_scores.size());
    const double n_neg = static_cast<double>(negative_scores.size());
    const double u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

} // namespace kgtox
