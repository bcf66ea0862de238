#pragma once

#include "kgtox/kg.hpp"
#include "kgtox/rng.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace kgtox {

// Binary structural fingerprint; length is fixed per dataset (881 default).
struct Fingerprint {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
};

// 1 - |a & b| / |a | b|; two all-zero fingerprints count as identical.
double tanimoto_distance(const Fingerprint& a, const Fingerprint& b);

enum class GroupKind : std::uint8_t { SpeciesDivision, ChemicalCluster };

struct GroupAssignment {
    GroupKind kind = GroupKind::SpeciesDivision;
    std::map<NodeId, std::string> label_of; // entity -> group label

    std::vector<std::string> distinct_labels() const;
};

// Group labels mapped to folds; samples inherit the fold of their group, so
// no group ever straddles a train/test boundary.
struct GroupedFoldPlan {
    std::size_t n_folds = 5;
    std::map<std::string, std::size_t> fold_of_label;

    std::size_t fold_of(const std::string& label) const;
    std::string to_json() const;
};

// Labels each species with its single hierarchy root. Species with zero or
// multiple roots abort with an error naming every offender.
GroupAssignment species_divisions(const KnowledgeGraph& kg, std::span<const NodeId> species);

// One merge of the agglomerative run; clusters are named by their smallest
// original item index.
struct MergeStep {
    std::size_t rep_a;
    std::size_t rep_b;
    double distance;
};

// Average-linkage (UPGMA) agglomeration over a full distance matrix. Ties
// pick the smallest (i, j) active pair, so the sequence is deterministic.
std::vector<MergeStep> agglomerate_average_linkage(std::vector<std::vector<double>> dist);

// Partition after replaying merges until k clusters remain; labels are dense
// ints ordered by each cluster's smallest item index.
std::vector<std::size_t> cut_dendrogram(std::span<const MergeStep> merges, std::size_t n_items,
                                        std::size_t k);

// Hierarchical clustering of fingerprints cut at k clusters; labels are
// "cluster_0".."cluster_{k-1}".
GroupAssignment cluster_chemicals(const std::vector<std::pair<NodeId, Fingerprint>>& fingerprints,
                                  std::size_t k);

// Random fold assignment. Exactly n_folds groups become a random bijection;
// otherwise groups go largest-first to the least-loaded fold with random
// tie-breaks. weights are per-group sample counts.
GroupedFoldPlan make_fold_plan(const GroupAssignment& groups,
                               const std::map<std::string, std::size_t>& weights,
                               std::size_t n_folds, Rng& rng);
GroupedFoldPlan make_fold_plan(const GroupAssignment& groups, std::size_t n_folds, Rng& rng);

// TSV rows: chemical IRI, bitstring of '0'/'1'. Header tolerated.
std::string fingerprints_to_tsv(const KnowledgeGraph& kg,
                                const std::vector<std::pair<NodeId, Fingerprint>>& fingerprints);
std::vector<std::pair<NodeId, Fingerprint>> fingerprints_from_tsv(KnowledgeGraph& kg,
                                                                  const std::string& text);

std::string assignment_to_csv(const KnowledgeGraph& kg, const GroupAssignment& assignment);

// Lower-triangular pairwise Tanimoto distances, long format.
std::string fingerprint_distances_csv(const KnowledgeGraph& kg,
                                      const std::vector<std::pair<NodeId, Fingerprint>>& fps);

} // namespace kgtox
