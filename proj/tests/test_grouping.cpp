#include "kgtox/errors.hpp"
#include "kgtox/grouping.hpp"
#include "kgtox/synth.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace kgtox;

namespace {

Fingerprint fp_from(const std::string& bits) {
    Fingerprint fp;
    for (char c : bits) fp.bits.push_back(c == '1');
    return fp;
}

// partition equality up to label renaming
bool same_partition(const GroupAssignment& a, const GroupAssignment& b) {
    if (a.label_of.size() != b.label_of.size()) return false;
    std::map<std::string, std::string> fwd, rev;
    for (const auto& [id, la] : a.label_of) {
        const auto it = b.label_of.find(id);
        if (it == b.label_of.end()) return false;
        const std::string& lb = it->second;
        if (fwd.count(la) && fwd[la] != lb) return false;
        if (rev.count(lb) && rev[lb] != la) return false;
        fwd[la] = lb;
        rev[lb] = la;
    }
    return true;
}

} // namespace

TEST_CASE("tanimoto distance basics") {
    CHECK(tanimoto_distance(fp_from("1100"), fp_from("1100")) == 0.0);
    CHECK(tanimoto_distance(fp_from("1100"), fp_from("0011")) == 1.0);
    CHECK(tanimoto_distance(fp_from("1100"), fp_from("1010")) == doctest::Approx(2.0 / 3.0));
    CHECK(tanimoto_distance(fp_from("0000"), fp_from("0000")) == 0.0);
    CHECK_THROWS_AS(tanimoto_distance(fp_from("10"), fp_from("100")), DomainError);
}

TEST_CASE("species_divisions labels species by their taxonomy root") {
    SynthConfig config;
    config.seed = 4;
    config.n_species = 40;
    config.n_chemicals = 10;
    config.species_divisions = 7;
    const SynthResult synth = generate(config);
    const auto groups = species_divisions(synth.kg, synth.species_ids);
    CHECK(groups.label_of.size() == 40);
    CHECK(groups.distinct_labels().size() == 7);
    // the first species belongs to the Fish division by construction
    CHECK(groups.label_of.at(synth.species_ids[0]) == "http://kgtox.example/division/Fish");
    for (const auto& [id, label] : groups.label_of) {
        CHECK(label == synth.latent.division_of_species.at(synth.kg.node(id).lexical));
    }
}

TEST_CASE("species_divisions names orphans") {
    KnowledgeGraph kg = load_ntriples_string(
        "<http://x/s1> <http://x/sub> <http://x/Fish> .\n"
        "<http://x/other> <http://x/p> <http://x/thing> .\n");
    kg.set_hierarchy_predicates({"http://x/sub"});
    const NodeId s1 = *kg.find_node(Term::iri("http://x/s1"));
    const NodeId orphan = *kg.find_node(Term::iri("http://x/other"));
    const std::vector<NodeId> ok = {s1};
    CHECK(species_divisions(kg, ok).label_of.at(s1) == "http://x/Fish");

    const std::vector<NodeId> bad = {s1, orphan};
    CHECK_THROWS_AS(species_divisions(kg, bad), GroupingError);
    try {
        species_divisions(kg, bad);
    } catch (const GroupingError& e) {
        CHECK(std::string(e.what()).find("http://x/other") != std::string::npos);
    }
}

TEST_CASE("cluster_chemicals groups identical fingerprints together") {
    std::vector<std::pair<NodeId, Fingerprint>> fps;
    for (NodeId i = 0; i < 15; ++i) {
        std::string bits = "00000";
        bits[i % 5] = '1';
        fps.emplace_back(i, fp_from(bits));
    }
    const auto groups = cluster_chemicals(fps, 5);
    CHECK(groups.distinct_labels().size() == 5);
    std::map<std::string, std::set<NodeId>> members;
    for (const auto& [id, label] : groups.label_of) members[label].insert(id);
    for (const auto& [label, ids] : members) {
        (void)label;
        REQUIRE(ids.size() == 3);
        const NodeId base = *ids.begin();
        for (NodeId id : ids) CHECK(id % 5 == base % 5);
    }
}

TEST_CASE("cluster_chemicals forces a stable split on all-identical input") {
    std::vector<std::pair<NodeId, Fingerprint>> fps;
    for (NodeId i = 0; i < 7; ++i) fps.emplace_back(i, fp_from("1010"));
    const auto a = cluster_chemicals(fps, 5);
    const auto b = cluster_chemicals(fps, 5);
    CHECK(a.distinct_labels().size() == 5);
    CHECK(a.label_of == b.label_of);
}

TEST_CASE("cluster_chemicals needs at least k chemicals") {
    std::vector<std::pair<NodeId, Fingerprint>> fps;
    fps.emplace_back(0, fp_from("10"));
    CHECK_THROWS_AS(cluster_chemicals(fps, 5), GroupingError);
}

TEST_CASE("planted blocks are recovered exactly") {
    SynthConfig config;
    config.seed = 15;
    config.n_species = 10;
    config.n_chemicals = 60;
    config.chemical_clusters = 5;
    const SynthResult synth = generate(config);
    const auto got = cluster_chemicals(synth.fingerprints, 5);

    GroupAssignment planted;
    planted.kind = GroupKind::ChemicalCluster;
    for (NodeId id : synth.chemical_ids) {
        planted.label_of[id] = synth.latent.cluster_of_chemical.at(synth.kg.node(id).lexical);
    }
    CHECK(same_partition(got, planted));
}

TEST_CASE("clustering is invariant to chemical order up to renaming") {
    SynthConfig config;
    config.seed = 23;
    config.n_species = 10;
    config.n_chemicals = 30;
    const SynthResult synth = generate(config);
    auto shuffled = synth.fingerprints;
    Rng rng(1);
    rng.shuffle(shuffled);
    CHECK(same_partition(cluster_chemicals(synth.fingerprints, 5),
                         cluster_chemicals(shuffled, 5)));
}

TEST_CASE("cutting at k and k-1 differs by exactly one merge") {
    SynthConfig config;
    config.seed = 2;
    config.n_species = 10;
    config.n_chemicals = 24;
    const SynthResult synth = generate(config);
    const std::size_t n = synth.fingerprints.size();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dist[i][j] = tanimoto_distance(synth.fingerprints[i].second,
                                           synth.fingerprints[j].second);
        }
    }
    const auto merges = agglomerate_average_linkage(dist);
    for (std::size_t k = 2; k < 8; ++k) {
        const auto at_k = cut_dendrogram(merges, n, k);
        const auto at_k1 = cut_dendrogram(merges, n, k - 1);
        // coarser partition: every k-1 cluster is a union of k-level clusters,
        // and exactly two k-level clusters share a k-1 label
        std::map<std::size_t, std::set<std::size_t>> coarse_of_fine;
        for (std::size_t i = 0; i < n; ++i) coarse_of_fine[at_k[i]].insert(at_k1[i]);
        std::map<std::size_t, std::set<std::size_t>> fine_of_coarse;
        for (std::size_t i = 0; i < n; ++i) fine_of_coarse[at_k1[i]].insert(at_k[i]);
        for (const auto& [fine, coarse] : coarse_of_fine) {
            (void)fine;
            CHECK(coarse.size() == 1);
        }
        std::size_t merged_pairs = 0;
        for (const auto& [coarse, fines] : fine_of_coarse) {
            (void)coarse;
            if (fines.size() == 2) ++merged_pairs;
            CHECK(fines.size() <= 2);
        }
        CHECK(merged_pairs == 1);
    }
}

TEST_CASE("make_fold_plan with five groups is a bijection") {
    GroupAssignment groups;
    groups.kind = GroupKind::ChemicalCluster;
    for (NodeId i = 0; i < 25; ++i) groups.label_of[i] = "cluster_" + std::to_string(i % 5);
    Rng rng(7);
    const auto plan = make_fold_plan(groups, 5, rng);
    std::set<std::size_t> folds;
    for (const auto& [label, fold] : plan.fold_of_label) {
        (void)label;
        folds.insert(fold);
    }
    CHECK(folds.size() == 5);
}

TEST_CASE("make_fold_plan spreads seven divisions over five folds") {
    GroupAssignment groups;
    groups.kind = GroupKind::SpeciesDivision;
    for (NodeId i = 0; i < 70; ++i) groups.label_of[i] = "division_" + std::to_string(i % 7);
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(100 + trial);
        const auto plan = make_fold_plan(groups, 5, rng);
        std::map<std::size_t, std::size_t> groups_per_fold;
        for (const auto& [label, fold] : plan.fold_of_label) {
            (void)label;
            ++groups_per_fold[fold];
        }
        CHECK(plan.fold_of_label.size() == 7);
        REQUIRE(groups_per_fold.size() == 5); // every fold nonempty
        std::size_t with_two = 0;
        for (const auto& [fold, count] : groups_per_fold) {
            (void)fold;
            CHECK(count <= 2);
            if (count == 2) ++with_two;
        }
        CHECK(with_two == 2); // pigeonhole: 7 groups, 5 folds
    }
}

TEST_CASE("make_fold_plan is deterministic for a fixed rng") {
    GroupAssignment groups;
    for (NodeId i = 0; i < 12; ++i) groups.label_of[i] = "g" + std::to_string(i % 6);
    Rng a(9), b(9);
    CHECK(make_fold_plan(groups, 5, a).fold_of_label == make_fold_plan(groups, 5, b).fold_of_label);
    CHECK_THROWS_AS(make_fold_plan(groups, 1, a), ConfigError);
}

TEST_CASE("fingerprint TSV round-trips") {
    KnowledgeGraph kg;
    std::vector<std::pair<NodeId, Fingerprint>> fps;
    fps.emplace_back(kg.intern_node(Term::iri("http://x/c1")), fp_from("10101"));
    fps.emplace_back(kg.intern_node(Term::iri("http://x/c2")), fp_from("01010"));
    const std::string tsv = fingerprints_to_tsv(kg, fps);
    const auto parsed = fingerprints_from_tsv(kg, tsv);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].second.bits == fps[0].second.bits);
    CHECK(parsed[1].second.bits == fps[1].second.bits);
    CHECK_THROWS_AS(fingerprints_from_tsv(kg, "c\t10x\n"), ParseError);
    CHECK_THROWS_AS(fingerprints_from_tsv(kg, "a\t10\nb\t100\n"), ParseError);
}
