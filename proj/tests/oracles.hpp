// Brute-force reference implementations used to check the library. These
// deliberately share no code with the implementations under test.
#pragma once

#include "kgtox/kg.hpp"
#include "kgtox/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Nested-loop conjunctive join over explicit term triples.
struct TermTriple {
    kgtox::Term s, p, o;
};

inline std::vector<TermTriple> all_term_triples(const kgtox::KnowledgeGraph& kg) {
    std::vector<TermTriple> out;
    for (const kgtox::Triple& t : kg.triples()) {
        out.push_back({kg.node(t.subject), kgtox::Term::iri(kg.relation(t.predicate)),
                       kg.node(t.object)});
    }
    return out;
}

inline std::vector<std::vector<kgtox::Term>> brute_force_join(
    const kgtox::KnowledgeGraph& kg, const kgtox::PatternQuery& q) {
    const auto triples = all_term_triples(kg);
    std::vector<std::vector<kgtox::Term>> rows;
    std::map<std::string, kgtox::Term> binding;

    auto match_slot = [&](const kgtox::PatternSlot& slot, const kgtox::Term& value,
                          std::vector<std::string>& bound) {
        if (!slot.is_variable) return slot.term == value;
        auto it = binding.find(slot.variable);
        if (it != binding.end()) return it->second == value;
        binding.emplace(slot.variable, value);
        bound.push_back(slot.variable);
        return true;
    };

    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
        if (idx == q.patterns.size()) {
            std::vector<kgtox::Term> row;
            for (const auto& var : q.projection) row.push_back(binding.at(var));
            rows.push_back(row);
            return;
        }
        for (const TermTriple& t : triples) {
            std::vector<std::string> bound;
            if (match_slot(q.patterns[idx].subject, t.s, bound) &&
                match_slot(q.patterns[idx].predicate, t.p, bound) &&
                match_slot(q.patterns[idx].object, t.o, bound)) {
                rec(idx + 1);
            }
            for (const auto& v : bound) binding.erase(v);
        }
    };
    rec(0);
    return rows;
}

// rows compared as multisets
inline bool same_bindings(std::vector<std::vector<kgtox::Term>> a,
                          std::vector<std::vector<kgtox::Term>> b) {
    auto key = [](const std::vector<kgtox::Term>& row) {
        std::string k;
        for (const auto& t : row) {
            k += std::to_string(static_cast<int>(t.kind)) + "\x1f" + t.lexical + "\x1f" +
                 t.datatype + "\x1e";
        }
        return k;
    };
    std::vector<std::string> ka, kb;
    for (const auto& r : a) ka.push_back(key(r));
    for (const auto& r : b) kb.push_back(key(r));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    return ka == kb;
}

// BFS over explicit (child -> parents) edges.
inline std::map<kgtox::NodeId, int> bfs_ancestors(
    const std::map<kgtox::NodeId, std::vector<kgtox::NodeId>>& parents, kgtox::NodeId start,
    int max_depth) {
    std::map<kgtox::NodeId, int> depth_of{{start, 0}};
    std::vector<kgtox::NodeId> frontier{start};
    for (int d = 0; d < max_depth && !frontier.empty(); ++d) {
        std::vector<kgtox::NodeId> next;
        for (kgtox::NodeId n : frontier) {
            auto it = parents.find(n);
            if (it == parents.end()) continue;
            for (kgtox::NodeId p : it->second) {
                if (!depth_of.count(p)) {
                    depth_of[p] = d + 1;
                    next.push_back(p);
                }
            }
        }
        frontier = std::move(next);
    }
    return depth_of;
}

// Leaves under `root` via (parent -> children) edges.
inline std::set<kgtox::NodeId> subtree_leaf_set(
    const std::map<kgtox::NodeId, std::vector<kgtox::NodeId>>& children, kgtox::NodeId root) {
    std::set<kgtox::NodeId> leaves;
    std::vector<kgtox::NodeId> stack{root};
    std::set<kgtox::NodeId> seen;
    while (!stack.empty()) {
        const kgtox::NodeId n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        auto it = children.find(n);
        if (it == children.end() || it->second.empty()) {
            leaves.insert(n);
            continue;
        }
        for (kgtox::NodeId c : it->second) stack.push_back(c);
    }
    return leaves;
}

// Ordinary least squares via normal equations with a tiny ridge, enough for
// one-hot design matrices.
inline std::vector<double> least_squares(const kgtox::Matrix& x, const std::vector<double>& y) {
    const std::size_t d = x.cols;
    std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < x.rows; ++r) s += x.at(r, i) * x.at(r, j);
            a[i][j] = s + (i == j ? 1e-8 : 0.0);
        }
        double s = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) s += x.at(r, i) * y[r];
        a[i][d] = s;
    }
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < d; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col || a[col][col] == 0.0) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= d; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> beta(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        if (a[i][i] != 0.0) beta[i] = a[i][d] / a[i][i];
    }
    return beta;
}

inline double r2_of_fit(const kgtox::Matrix& x, const std::vector<double>& y,
                        const std::vector<double>& beta) {
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (std::size_t r = 0; r < x.rows; ++r) {
        double pred = 0.0;
        for (std::size_t c = 0; c < x.cols; ++c) pred += x.at(r, c) * beta[c];
        ss_res += (y[r] - pred) * (y[r] - pred);
        ss_tot += (y[r] - mean) * (y[r] - mean);
    }
    return 1.0 - ss_res / ss_tot;
}

// Student-t two-sided tail via Simpson quadrature of the density; slow but
// independent of the incomplete-beta route.
inline double t_two_sided_p_quadrature(double t, double nu) {
    const double abs_t = std::fabs(t);
    auto pdf = [nu](double u) {
        return std::exp(std::lgamma((nu + 1.0) / 2.0) - std::lgamma(nu / 2.0)) /
               std::sqrt(nu * 3.14159265358979323846) *
               std::pow(1.0 + u * u / nu, -(nu + 1.0) / 2.0);
    };
    // integrate pdf over [-abs_t, abs_t], complement is the two-sided p
    const int steps = 20000;
    const double h = 2.0 * abs_t / steps;
    double sum = pdf(-abs_t) + pdf(abs_t);
    for (int i = 1; i < steps; ++i) {
        sum += pdf(-abs_t + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    const double inside = sum * h / 3.0;
    return std::max(0.0, 1.0 - inside);
}

inline double pearson_r_direct(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double num = n * sxy - sx * sy;
    const double den = std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy);
    return num / den;
}

} // namespace oracle
