#pragma once

#include "kgtox/eval.hpp"
#include "kgtox/forest.hpp"
#include "kgtox/kg.hpp"
#include "kgtox/matrix.hpp"
#include "kgtox/stats.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kgtox {

// Entity feature vectors of one kind (chemicals or species) with pairwise
// distances on demand. Euclidean by default, cosine behind a switch.
class SimilarityIndex {
public:
    static SimilarityIndex build(const std::vector<NodeId>& ids, const FeatureMap& features,
                                 bool use_cosine = false);

    std::size_t size() const { return ids_.size(); }
    const std::vector<NodeId>& ids() const { return ids_; }
    bool contains(NodeId id) const { return index_of_.count(id) > 0; }
    std::size_t index_of(NodeId id) const;

    double distance(NodeId a, NodeId b) const;
    double distance_by_index(std::size_t i, std::size_t j) const;

    // Distances from e to every indexed entity, in index order (self = 0).
    std::vector<double> distances_from(NodeId e) const;

    // The n nearest other entities; ties resolved by index order.
    std::vector<NodeId> nearest(NodeId e, std::size_t n) const;

private:
    std::vector<NodeId> ids_;
    Matrix features_;
    std::map<NodeId, std::size_t> index_of_;
    bool use_cosine_ = false;
};

struct DensityCell {
    std::size_t prediction_index = 0;
    std::size_t chemical_neighbours = 0;
    std::size_t species_neighbours = 0;
    int categorical_error = -1; // stamped by the pipeline
    double scale_chemical = 0.0; // radius or depth that produced the counts
    double scale_species = 0.0;
};

// Entities strictly inside the radius around each side of the pair, the pair
// itself excluded.
DensityCell radius_density(const SimilarityIndex& chemicals, const SimilarityIndex& species,
                           NodeId chemical, NodeId species_id, double r_chem, double r_species);

// Data-bearing leaves within `depth` hierarchy levels of each side.
DensityCell depth_density(const KnowledgeGraph& kg, NodeId chemical, NodeId species_id,
                          int depth, const std::function<bool(NodeId)>& has_data);

// Predictions split by categorical error; each class gets a 2-D frequency
// table over (chemical count, species count).
struct DensityMap {
    std::array<std::map<std::pair<std::size_t, std::size_t>, std::size_t>, 4> histograms;
    std::array<std::size_t, 4> class_counts{};

    std::string class_csv(int error_class) const;
    std::string long_csv() const; // error_class,chem_count,species_count,frequency
};

DensityMap density_map(std::span<const DensityCell> cells);

struct ErrorModelResult {
    RandomForestRegressor forest; // trained on the full dataset
    double mean_test_error = 0.0; // mean absolute deviation over runs
    double std_test_error = 0.0;
    double baseline_mean_error = 0.0; // constant-mean predictor, same splits
    std::size_t n_runs = 0;

    std::string metrics_json() const;
};

// Random forest on distance vectors -> absolute error, over n_runs random
// 80/20 splits.
ErrorModelResult fit_error_model(const Matrix& distance_features,
                                 std::span<const double> abs_errors, double train_fraction,
                                 std::size_t n_runs, std::uint64_t seed);

struct CommonFactsRow {
    RelId predicate;
    std::vector<NodeId> objects; // every (predicate, object) holds for all members
};

struct CommonFacts {
    NodeId entity = 0;
    std::size_t n_requested = 0;
    bool truncated = false; // fewer candidates than requested
    std::vector<NodeId> members; // entity plus its nearest same-kind entities
    std::vector<CommonFactsRow> rows;

    std::size_t fact_count() const;
};

// (predicate, object) pairs asserted for the entity and each of its n
// nearest neighbours in the index.
CommonFacts common_facts(const KnowledgeGraph& kg, const SimilarityIndex& index, NodeId entity,
                         std::size_t n);

struct CorrelationRow {
    std::size_t n = 0;
    std::string side; // "chemical" or "species"
    Correlation correlation;
};

// Pearson correlation between shared-fact counts and absolute prediction
// error, per neighbourhood size and side.
std::vector<CorrelationRow> fact_error_correlation(
    const KnowledgeGraph& kg, const SimilarityIndex& chemicals, const SimilarityIndex& species,
    std::span<const SampleOutcome> predictions, std::span<const std::size_t> n_values);

std::string correlation_table_csv(std::span<const CorrelationRow> rows);

std::string common_facts_csv(const KnowledgeGraph& kg,
                             std::span<const SampleOutcome> predictions,
                             const SimilarityIndex& chemicals, const SimilarityIndex& species,
                             std::size_t n);

} // namespace kgtox
