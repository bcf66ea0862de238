#include "kgtox/grouping.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace kgtox {

double tanimoto_distance(const Fingerprint& a, const Fingerprint& b) {
    if (a.size() != b.size()) throw DomainError("fingerprint length mismatch");
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool ba = a.bits[i] != 0;
        const bool bb = b.bits[i] != 0;
        inter += ba && bb;
        uni += ba || bb;
    }
    if (uni == 0) return 0.0;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::string> GroupAssignment::distinct_labels() const {
    std::vector<std::string> out;
    for (const auto& [id, label] : label_of) {
        (void)id;
        if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t GroupedFoldPlan::fold_of(const std::string& label) const {
    auto it = fold_of_label.find(label);
    if (it == fold_of_label.end()) throw LookupError("no fold for group " + label);
    return it->second;
}

std::string GroupedFoldPlan::to_json() const {
    nlohmann::json j;
    j["n_folds"] = n_folds;
    nlohmann::json assignment = nlohmann::json::object();
    for (const auto& [label, fold] : fold_of_label) assignment[label] = fold;
    j["fold_of_group"] = assignment;
    return j.dump(2) + "\n";
}

GroupAssignment species_divisions(const KnowledgeGraph& kg, std::span<const NodeId> species) {
    GroupAssignment out;
    out.kind = GroupKind::SpeciesDivision;
    std::vector<std::string> offenders;

    for (NodeId s : species) {
        std::vector<NodeId> roots;
        for (const auto& [ancestor, depth] :
             kg.hierarchy_ancestors(s, std::numeric_limits<int>::max() - 1)) {
            (void)depth;
            if (kg.hierarchy_parents(ancestor).empty()) roots.push_back(ancestor);
        }
        if (roots.size() == 1 && roots.front() != s) {
            out.label_of[s] = kg.node(roots.front()).lexical;
        } else if (roots.size() == 1 && roots.front() == s) {
            offenders.push_back(kg.node(s).lexical + " (no division root)");
        } else {
            offenders.push_back(kg.node(s).lexical + " (" + std::to_string(roots.size()) +
                                " division roots)");
        }
    }
    if (!offenders.empty()) {
        std::string msg = "species without a unique division root:";
        for (const auto& o : offenders) msg += " " + o;
        throw GroupingError(msg);
    }
    return out;
}

std::vector<MergeStep> agglomerate_average_linkage(std::vector<std::vector<double>> dist) {
    const std::size_t n = dist.size();
    for (const auto& row : dist) {
        if (row.size() != n) throw DomainError("distance matrix must be square");
    }
    struct Cluster {
        std::size_t rep;  // smallest original item index
        std::size_t size;
    };
    std::vector<Cluster> clusters(n);
    for (std::size_t i = 0; i < n; ++i) clusters[i] = {i, 1};

    std::vector<MergeStep> merges;
    merges.reserve(n > 0 ? n - 1 : 0);

    while (clusters.size() > 1) {
        std::size_t best_i = 0, best_j = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                if (dist[i][j] < best) { // strict <: ties keep smallest (i, j)
                    best = dist[i][j];
                    best_i = i;
                    best_j = j;
                }
            }
        }
        merges.push_back({clusters[best_i].rep, clusters[best_j].rep, best});

        // Lance-Williams update for unweighted average linkage
        const double si = static_cast<double>(clusters[best_i].size);
        const double sj = static_cast<double>(clusters[best_j].size);
        for (std::size_t t = 0; t < clusters.size(); ++t) {
            if (t == best_i || t == best_j) continue;
            const double d = (si * dist[best_i][t] + sj * dist[best_j][t]) / (si + sj);
            dist[best_i][t] = d;
            dist[t][best_i] = d;
        }
        clusters[best_i].rep = std::min(clusters[best_i].rep, clusters[best_j].rep);
        clusters[best_i].size += clusters[best_j].size;

        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_j));
        dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(best_j));
        for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(best_j));
    }
    return merges;
}

std::vector<std::size_t> cut_dendrogram(std::span<const MergeStep> merges, std::size_t n_items,
                                        std::size_t k) {
    if (k == 0 || k > n_items) throw ConfigError("cluster count out of range");

    std::vector<std::size_t> parent(n_items);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    const std::size_t n_merges = n_items - k;
    if (n_merges > merges.size()) throw DomainError("not enough merges to cut at k");
    for (std::size_t m = 0; m < n_merges; ++m) {
        const std::size_t ra = find(merges[m].rep_a);
        const std::size_t rb = find(merges[m].rep_b);
        // root at the smaller representative
        parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    std::vector<std::size_t> labels(n_items);
    std::map<std::size_t, std::size_t> dense;
    for (std::size_t i = 0; i < n_items; ++i) {
        const std::size_t root = find(i);
        auto [it, inserted] = dense.emplace(root, dense.size());
        (void)inserted;
        labels[i] = it->second;
    }
    return labels;
}

GroupAssignment cluster_chemicals(const std::vector<std::pair<NodeId, Fingerprint>>& fingerprints,
                                  std::size_t k) {
    if (fingerprints.size() < k) {
        throw GroupingError("need at least " + std::to_string(k) + " chemicals, have " +
                            std::to_string(fingerprints.size()));
    }
    const std::size_t n = fingerprints.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = tanimoto_distance(fingerprints[i].second, fingerprints[j].second);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    const auto merges = agglomerate_average_linkage(std::move(dist));
    const auto labels = cut_dendrogram(merges, n, k);

    GroupAssignment out;
    out.kind = GroupKind::ChemicalCluster;
    for (std::size_t i = 0; i < n; ++i) {
        out.label_of[fingerprints[i].first] = "cluster_" + std::to_string(labels[i]);
    }
    return out;
}

GroupedFoldPlan make_fold_plan(const GroupAssignment& groups,
                               const std::map<std::string, std::size_t>& weights,
                               std::size_t n_folds, Rng& rng) {
    if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
    const std::vector<std::string> labels = groups.distinct_labels();
    if (labels.empty()) throw GroupingError("no groups to assign");

    GroupedFoldPlan plan;
    plan.n_folds = n_folds;

    if (labels.size() == n_folds) {
        std::vector<std::size_t> folds(n_folds);
        std::iota(folds.begin(), folds.end(), 0);
        rng.shuffle(folds);
        for (std::size_t i = 0; i < labels.size(); ++i) plan.fold_of_label[labels[i]] = folds[i];
        return plan;
    }

    // Greedy balance: heaviest groups first, equal weights in random relative
    // order, ties between equally loaded folds broken at random.
    std::vector<std::string> order = labels;
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                         const auto wa = weights.count(a) ? weights.at(a) : 1;
                         const auto wb = weights.count(b) ? weights.at(b) : 1;
                         return wa > wb;
                     });

    std::vector<std::size_t> load(n_folds, 0);
    for (const std::string& label : order) {
        const std::size_t w = weights.count(label) ? weights.at(label) : 1;
        const std::size_t min_load = *std::min_element(load.begin(), load.end());
        std::vector<std::size_t> candidates;
        for (std::size_t f = 0; f < n_folds; ++f) {
            if (load[f] == min_load) candidates.push_back(f);
        }
        const std::size_t fold = candidates[rng.uniform_int(candidates.size())];
        plan.fold_of_label[label] = fold;
        load[fold] += w;
    }
    return plan;
}

GroupedFoldPlan make_fold_plan(const GroupAssignment& groups, std::size_t n_folds, Rng& rng) {
    std::map<std::string, std::size_t> weights;
    for (const auto& [id, label] : groups.label_of) {
        (void)id;
        ++weights[label];
    }
    return make_fold_plan(groups, weights, n_folds, rng);
}

std::string fingerprints_to_tsv(const KnowledgeGraph& kg,
                                const std::vector<std::pair<NodeId, Fingerprint>>& fingerprints) {
    std::string out = "chemical\tfingerprint\n";
    for (const auto& [id, fp] : fingerprints) {
        out += kg.node(id).lexical;
        out += '\t';
        for (std::uint8_t b : fp.bits) out += b ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::vector<std::pair<NodeId, Fingerprint>> fingerprints_from_tsv(KnowledgeGraph& kg,
                                                                  const std::string& text) {
    std::vector<std::pair<NodeId, Fingerprint>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected_len = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("chemical\t", 0) == 0) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 2) throw ParseError(line_no, "expected 2 tab-separated columns");
        Fingerprint fp;
        fp.bits.reserve(cols[1].size());
        for (char c : cols[1]) {
            if (c != '0' && c != '1') throw ParseError(line_no, "fingerprint must be 0/1");
            fp.bits.push_back(c == '1' ? 1 : 0);
        }
        if (expected_len == 0) {
            expected_len = fp.size();
        } else if (fp.size() != expected_len) {
            throw ParseError(line_no, "inconsistent fingerprint length");
        }
        out.emplace_back(kg.intern_node(Term::iri(cols[0])), std::move(fp));
    }
    return out;
}

std::string assignment_to_csv(const KnowledgeGraph& kg, const GroupAssignment& assignment) {
    std::string out = "entity,label\n";
    for (const auto& [id, label] : assignment.label_of) {
        out += kg.node(id).lexical;
        out += ',';
        out += label;
        out += '\n';
    }
    return out;
}

std::string fingerprint_distances_csv(const KnowledgeGraph& kg,
                                      const std::vector<std::pair<NodeId, Fingerprint>>& fps) {
    std::string out = "chemical_a,chemical_b,distance\n";
    for (std::size_t i = 0; i + 1 < fps.size(); ++i) {
        for (std::size_t j = i + 1; j < fps.size(); ++j) {
            out += kg.node(fps[i].first).lexical;
            out += ',';
            out += kg.node(fps[j].first).lexical;
            out += ',';
            out += format_double(tanimoto_distance(fps[i].second, fps[j].second));
            out += '\n';
        }
    }
    return out;
}

} // namespace kgtox
