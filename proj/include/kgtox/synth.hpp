#pragma once

#include "kgtox/effects.hpp"
#include "kgtox/grouping.hpp"
#include "kgtox/kg.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kgtox {

struct SynthConfig {
    std::uint64_t seed = 42;
    std::size_t n_species = 60;
    std::size_t n_chemicals = 40;
    std::size_t species_divisions = 7;
    std::size_t chemical_clusters = 5;
    std::size_t taxonomy_branching = 3;
    std::size_t trait_vocabulary_size = 16;
    std::size_t fingerprint_length = 881;
    double noise_std = 0.5;           // log10-concentration units
    double pair_coverage = 0.25;      // fraction of (chemical, species) pairs with data
    std::size_t min_replicates = 3;   // >= 3, so aggregation never drops a generated pair
    std::size_t max_replicates = 5;

    void validate() const;
};

// Ground truth behind the generated effect data. Division sensitivities are
// linear in the division's trait prototype, so they vary smoothly with what
// the graph actually asserts about a species; cluster potencies are
// independent draws. A rank-one division x cluster interaction is added on
// top.
struct LatentModel {
    double baseline = 1.0; // global mean log10 mg/L
    double noise_std = 0.5;
    std::map<std::string, double> division_offset;      // division IRI -> offset
    std::map<std::string, double> cluster_offset;       // cluster root IRI -> offset
    std::map<std::string, double> division_interaction; // u_d
    std::map<std::string, double> cluster_interaction;  // v_c
    std::map<std::string, std::string> division_of_species; // species IRI -> division IRI
    std::map<std::string, std::string> cluster_of_chemical; // chemical IRI -> cluster IRI

    // True mean log10 concentration (mg/L) for a pair.
    double latent_log10(const std::string& species_iri, const std::string& chemical_iri) const;

    std::string to_json() const;
    static LatentModel from_json(const std::string& text);
};

struct SynthResult {
    KnowledgeGraph kg; // hierarchy predicates already configured
    std::vector<EffectRecord> records;
    std::vector<std::pair<NodeId, Fingerprint>> fingerprints;
    LatentModel latent;
    std::vector<NodeId> species_ids;
    std::vector<NodeId> chemical_ids;
};

// Deterministic in the config: same config, same bytes out.
SynthResult generate(const SynthConfig& config);

// Predicate IRIs used by the generator.
namespace synth_vocab {
inline constexpr const char* kParentTaxon = "http://kgtox.example/ns/parentTaxon";
inline constexpr const char* kParentClass = "http://kgtox.example/ns/parentClass";
inline constexpr const char* kHabitat = "http://kgtox.example/ns/habitat";
inline constexpr const char* kPresentIn = "http://kgtox.example/ns/presentIn";
inline constexpr const char* kHasFeature = "http://kgtox.example/ns/hasFeature";
inline constexpr const char* kIsHeavy = "http://kgtox.example/ns/isHeavyCompound";
inline constexpr const char* kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr const char* kXsdBoolean = "http://www.w3.org/2001/XMLSchema#boolean";
} // namespace synth_vocab

} // namespace kgtox
