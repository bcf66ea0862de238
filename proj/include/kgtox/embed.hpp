#pragma once

#include "kgtox/kg.hpp"
#include "kgtox/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kgtox {

struct TrainingConfig {
    std::size_t embedding_dim = 50; // complex dimension k; one init yields 2k reals
    std::size_t negatives_per_positive = 1;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t epochs = 100;
    std::size_t batch_size = 256;
    std::uint64_t seed = 0;
    std::size_t n_inits = 4;
    double init_scale = 0.1;

    std::size_t feature_dim() const { return 2 * embedding_dim; }

    void validate() const;
};

// Complex-valued embeddings stored as separate real/imaginary row-major
// blocks inside one flat parameter vector, so the optimizer sees a single
// contiguous array.
class ComplexEmbeddingTable {
public:
    ComplexEmbeddingTable(std::size_t n_entities, std::size_t n_relations, std::size_t k);

    std::size_t k() const { return k_; }
    std::size_t feature_width() const { return 2 * k_; } // [real || imag]
    std::size_t n_entities() const { return n_entities_; }
    std::size_t n_relations() const { return n_relations_; }

    std::span<double> entity_real(NodeId e);
    std::span<double> entity_imag(NodeId e);
    std::span<double> relation_real(RelId p);
    std::span<double> relation_imag(RelId p);
    std::span<const double> entity_real(NodeId e) const;
    std::span<const double> entity_imag(NodeId e) const;
    std::span<const double> relation_real(RelId p) const;
    std::span<const double> relation_imag(RelId p) const;

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    // Offsets into the flat parameter vector; used by the gradient code.
    std::size_t entity_real_offset(NodeId e) const;
    std::size_t entity_imag_offset(NodeId e) const;
    std::size_t relation_real_offset(RelId p) const;
    std::size_t relation_imag_offset(RelId p) const;

    void randomize(Rng& rng, double scale);

private:
    std::size_t n_entities_;
    std::size_t n_relations_;
    std::size_t k_;
    std::vector<double> params_;
};

// Trilinear ComplEx score Re(<e_s, e_p, conj(e_o)>).
double score_complex(const ComplexEmbeddingTable& table, NodeId s, RelId p, NodeId o);

// log(1 + exp(-label * score)), softplus form, stable for |score| up to 1e4.
double logistic_loss(double score, int label);

struct LabeledTriple {
    Triple triple;
    int label = 1; // +1 true, -1 corrupted
};

enum class CorruptMode : std::uint8_t { Subject, Object, Both };

// Replaces the chosen position(s) with a uniformly random different entity;
// the predicate is never touched. Negatives may collide with true triples.
LabeledTriple corrupt(const Triple& t, std::size_t n_entities, Rng& rng, CorruptMode mode);

struct AdamState {
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

// One dense Adam update with bias correction. Throws TrainingError on
// non-finite gradients, reporting the step index.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainingConfig& config);

// Total pointwise logistic loss over the labeled set and its gradient with
// respect to every embedding parameter.
std::pair<double, std::vector<double>> loss_and_gradient(
    const ComplexEmbeddingTable& table, std::span<const LabeledTriple> batch);

struct TrainResult {
    ComplexEmbeddingTable table;
    std::vector<double> epoch_mean_loss; // one entry per epoch
};

// Epochs over shuffled positives, each paired with corruptions that
// alternate between subject and object replacement; Adam per batch.
TrainResult train(const KnowledgeGraph& kg, const TrainingConfig& config);

// n_inits independent runs differing only in their derived seeds.
std::vector<TrainResult> train_inits(const KnowledgeGraph& kg, const TrainingConfig& config);

// Per-init [real || imag] blocks concatenated in init order;
// length = n_inits * 2k (400 under defaults).
std::vector<double> entity_features(const std::vector<ComplexEmbeddingTable>& tables, NodeId e);

// Deterministic standard-normal vector per (entity, seed).
std::vector<double> random_features(NodeId e, std::size_t dim, std::uint64_t seed);

// AUC of held-out true triples against one random corruption each.
double link_prediction_auc(const ComplexEmbeddingTable& table,
                           std::span<const Triple> held_out, std::size_t n_entities,
                           Rng& rng);

// CSV rows: term,re_0..re_{k-1},im_0..im_{k-1}. Terms use N-Triples syntax.
std::string table_to_csv(const KnowledgeGraph& kg, const ComplexEmbeddingTable& table);

// CSV rows: term,f_0..f_{n_inits*2k-1} for every node in the graph.
std::string features_to_csv(const KnowledgeGraph& kg,
                            const std::vector<ComplexEmbeddingTable>& tables);

// Parses a features CSV back into per-term vectors (term syntax as above).
std::vector<std::pair<Term, std::vector<double>>> features_from_csv(const std::string& text);

} // namespace kgtox
