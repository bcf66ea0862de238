#include "kgtox/effects.hpp"
#include "kgtox/errors.hpp"
#include "kgtox/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace kgtox;

TEST_CASE("generate is deterministic in the config") {
    SynthConfig config;
    config.seed = 77;
    config.n_species = 30;
    config.n_chemicals = 15;
    const SynthResult a = generate(config);
    const SynthResult b = generate(config);
    CHECK(a.kg.serialize_ntriples() == b.kg.serialize_ntriples());
    CHECK(effects_to_tsv(a.kg, a.records) == effects_to_tsv(b.kg, b.records));
    CHECK(fingerprints_to_tsv(a.kg, a.fingerprints) == fingerprints_to_tsv(b.kg, b.fingerprints));
    CHECK(a.latent.to_json() == b.latent.to_json());
}

TEST_CASE("zero noise collapses replicate spread to exactly zero") {
    SynthConfig config;
    config.seed = 5;
    config.n_species = 14;
    config.n_chemicals = 10;
    config.noise_std = 0.0;
    config.pair_coverage = 0.6;
    const SynthResult synth = generate(config);
    const auto samples = aggregate(normalize_records(filter_records(synth.records)));
    REQUIRE(!samples.empty());
    for (const auto& s : samples) CHECK(s.replicate_std == 0.0);
}

TEST_CASE("every species hangs under exactly one division root") {
    SynthConfig config;
    config.seed = 9;
    config.n_species = 200;
    config.n_chemicals = 100;
    config.species_divisions = 7;
    config.chemical_clusters = 5;
    const SynthResult synth = generate(config);

    // graph-walk oracle over the emitted triples
    std::map<NodeId, std::vector<NodeId>> parents;
    const auto taxon_rel = synth.kg.find_relation(synth_vocab::kParentTaxon);
    REQUIRE(taxon_rel.has_value());
    for (const Triple& t : synth.kg.triples()) {
        if (t.predicate == *taxon_rel) parents[t.subject].push_back(t.object);
    }
    std::set<std::string> roots_seen;
    for (NodeId s : synth.species_ids) {
        const auto reach = oracle::bfs_ancestors(parents, s, 1000);
        std::vector<NodeId> roots;
        for (const auto& [node, depth] : reach) {
            (void)depth;
            if (!parents.count(node)) roots.push_back(node);
        }
        REQUIRE(roots.size() == 1);
        roots_seen.insert(synth.kg.node(roots[0]).lexical);
    }
    CHECK(roots_seen.size() == 7);
}

TEST_CASE("every generated pair carries at least three replicates and passes the filter") {
    SynthConfig config;
    config.seed = 13;
    config.n_species = 25;
    config.n_chemicals = 12;
    const SynthResult synth = generate(config);

    CHECK(filter_records(synth.records).size() == synth.records.size());

    std::map<std::pair<NodeId, NodeId>, std::size_t> counts;
    for (const auto& r : synth.records) ++counts[{r.chemical, r.species}];
    REQUIRE(!counts.empty());
    for (const auto& [pair, n] : counts) {
        (void)pair;
        CHECK(n >= 3);
    }
    // nothing is lost in aggregation
    CHECK(aggregate(normalize_records(synth.records)).size() == counts.size());
}

TEST_CASE("latent structure is recoverable from true one-hot features") {
    SynthConfig config;
    config.seed = 21;
    config.n_species = 42;
    config.n_chemicals = 25;
    config.noise_std = 0.0;
    config.pair_coverage = 0.5;
    const SynthResult synth = generate(config);
    const auto samples = aggregate(normalize_records(synth.records));
    REQUIRE(samples.size() > 50);

    // design matrix: division one-hots || cluster one-hots || intercept
    std::vector<std::string> divisions, clusters;
    for (const auto& [iri, off] : synth.latent.division_offset) {
        (void)off;
        divisions.push_back(iri);
    }
    for (const auto& [iri, off] : synth.latent.cluster_offset) {
        (void)off;
        clusters.push_back(iri);
    }
    Matrix x(samples.size(), divisions.size() + clusters.size() + 1);
    std::vector<double> y;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::string spec_iri = synth.kg.node(samples[i].species).lexical;
        const std::string chem_iri = synth.kg.node(samples[i].chemical).lexical;
        const std::string div = synth.latent.division_of_species.at(spec_iri);
        const std::string clu = synth.latent.cluster_of_chemical.at(chem_iri);
        for (std::size_t d = 0; d < divisions.size(); ++d) {
            if (divisions[d] == div) x.at(i, d) = 1.0;
        }
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (clusters[c] == clu) x.at(i, divisions.size() + c) = 1.0;
        }
        x.at(i, divisions.size() + clusters.size()) = 1.0;
        y.push_back(samples[i].target);
    }
    const auto beta = oracle::least_squares(x, y);
    CHECK(oracle::r2_of_fit(x, y, beta) >= 0.9);
}

TEST_CASE("latent json round-trips") {
    SynthConfig config;
    config.seed = 3;
    config.n_species = 10;
    config.n_chemicals = 6;
    const SynthResult synth = generate(config);
    const LatentModel parsed = LatentModel::from_json(synth.latent.to_json());
    CHECK(parsed.to_json() == synth.latent.to_json());
    const std::string spec_iri = synth.kg.node(synth.species_ids[3]).lexical;
    const std::string chem_iri = synth.kg.node(synth.chemical_ids[2]).lexical;
    CHECK(parsed.latent_log10(spec_iri, chem_iri) ==
          doctest::Approx(synth.latent.latent_log10(spec_iri, chem_iri)));
}

TEST_CASE("degenerate configs are rejected") {
    SynthConfig config;
    config.n_species = 0;
    CHECK_THROWS_AS(generate(config), ConfigError);
    config = SynthConfig{};
    config.min_replicates = 2;
    CHECK_THROWS_AS(generate(config), ConfigError);
    config = SynthConfig{};
    config.n_species = 3;
    config.species_divisions = 7;
    CHECK_THROWS_AS(generate(config), ConfigError);
}

TEST_CASE("fingerprints have the configured length and planted block structure") {
    SynthConfig config;
    config.seed = 8;
    config.n_species = 10;
    config.n_chemicals = 20;
    config.fingerprint_length = 128;
    const SynthResult synth = generate(config);
    REQUIRE(synth.fingerprints.size() == 20);
    for (const auto& [id, fp] : synth.fingerprints) {
        (void)id;
        CHECK(fp.size() == 128);
    }
    // same-cluster fingerprints are closer than cross-cluster ones on average
    double within = 0.0, across = 0.0;
    std::size_t n_within = 0, n_across = 0;
    for (std::size_t i = 0; i < synth.fingerprints.size(); ++i) {
        for (std::size_t j = i + 1; j < synth.fingerprints.size(); ++j) {
            const auto& ci = synth.latent.cluster_of_chemical.at(
                synth.kg.node(synth.fingerprints[i].first).lexical);
            const auto& cj = synth.latent.cluster_of_chemical.at(
                synth.kg.node(synth.fingerprints[j].first).lexical);
            const double d =
                tanimoto_distance(synth.fingerprints[i].second, synth.fingerprints[j].second);
            if (ci == cj) {
                within += d;
                ++n_within;
            } else {
                across += d;
                ++n_across;
            }
        }
    }
    CHECK(within / n_within < across / n_across);
}
