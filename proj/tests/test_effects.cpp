#include "kgtox/effects.hpp"
#include "kgtox/errors.hpp"
#include "kgtox/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgtox;

namespace {

EffectRecord record(NodeId chem, NodeId species, Endpoint ep, EffectKind eff, double conc,
                    ConcentrationUnit unit, double hours) {
    EffectRecord r;
    r.chemical = chem;
    r.species = species;
    r.endpoint = ep;
    r.effect = eff;
    r.concentration = conc;
    r.unit = unit;
    r.duration_hours = hours;
    return r;
}

EffectRecord mor(NodeId chem, NodeId species, double conc_mg) {
    return record(chem, species, Endpoint::LC50, EffectKind::MOR, conc_mg,
                  ConcentrationUnit::MgPerL, 48.0);
}

} // namespace

TEST_CASE("filter keeps acute mortality rows and drops the rest") {
    const std::vector<EffectRecord> in = {
        mor(0, 1, 5.0),                                                                  // kept
        record(0, 1, Endpoint::EC50, EffectKind::Other, 5.0, ConcentrationUnit::MgPerL, 48), // effect
        record(0, 1, Endpoint::LC50, EffectKind::MOR, 5.0, ConcentrationUnit::MgPerL, 12),   // short
        record(0, 1, Endpoint::LC50, EffectKind::MOR, 5.0, ConcentrationUnit::MgPerL, 120),  // long
        record(0, 1, Endpoint::Other, EffectKind::MOR, 5.0, ConcentrationUnit::MgPerL, 48),  // endpoint
        record(0, 1, Endpoint::LD50, EffectKind::MOR, 5.0, ConcentrationUnit::Other, 48),    // unit
        record(0, 1, Endpoint::EC50, EffectKind::MOR, 5.0, ConcentrationUnit::UgPerL, 96),   // kept
        record(0, 1, Endpoint::LD50, EffectKind::MOR, 5.0, ConcentrationUnit::MgPerL, 24),   // kept
    };
    const auto kept = filter_records(in);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].endpoint == Endpoint::LC50);
    CHECK(kept[1].endpoint == Endpoint::EC50);
    CHECK(kept[2].endpoint == Endpoint::LD50);
    // idempotence: re-filtering the kept rows is a no-op
    CHECK(filter_records(kept).size() == kept.size());
}

TEST_CASE("normalize_unit converts micrograms and rejects others") {
    CHECK(normalize_unit(5.0, ConcentrationUnit::MgPerL) == 5.0);
    CHECK(normalize_unit(1000.0, ConcentrationUnit::UgPerL) == doctest::Approx(1.0));
    CHECK(normalize_unit(0.5, ConcentrationUnit::UgPerL) == doctest::Approx(0.0005));
    CHECK_THROWS_AS(normalize_unit(1.0, ConcentrationUnit::Other), UnitError);
}

TEST_CASE("aggregate takes the median and drops sparse pairs") {
    std::vector<EffectRecord> in = {
        mor(0, 1, 1.0), mor(0, 1, 10.0), mor(0, 1, 100.0), // pair (0,1): median 10
        mor(2, 1, 5.0), mor(2, 1, 5.0),                    // pair (2,1): only 2 rows
    };
    const auto samples = aggregate(in);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].chemical == 0);
    CHECK(samples[0].median_mg_per_l == doctest::Approx(10.0));
    CHECK(samples[0].target == doctest::Approx(-1.0));
    CHECK(samples[0].n_replicates == 3);
}

TEST_CASE("aggregate: constant replicates have zero spread") {
    const auto samples = aggregate({mor(0, 1, 1.0), mor(0, 1, 1.0), mor(0, 1, 1.0)});
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].replicate_std == 0.0);
}

TEST_CASE("aggregate: even replicate count averages the middle pair") {
    const auto samples =
        aggregate({mor(0, 1, 1.0), mor(0, 1, 2.0), mor(0, 1, 4.0), mor(0, 1, 8.0)});
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].median_mg_per_l == doctest::Approx(3.0));
}

TEST_CASE("aggregate is permutation invariant") {
    Rng rng(5);
    std::vector<EffectRecord> in;
    for (int pair = 0; pair < 6; ++pair) {
        const int n = 3 + static_cast<int>(rng.uniform_int(4));
        for (int r = 0; r < n; ++r) {
            in.push_back(mor(static_cast<NodeId>(pair), static_cast<NodeId>(pair + 100),
                             0.5 + rng.uniform() * 20.0));
        }
    }
    const auto base = aggregate(in);
    for (int trial = 0; trial < 5; ++trial) {
        rng.shuffle(in);
        const auto again = aggregate(in);
        REQUIRE(again.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(again[i].chemical == base[i].chemical);
            CHECK(again[i].species == base[i].species);
            CHECK(again[i].median_mg_per_l == doctest::Approx(base[i].median_mg_per_l));
            CHECK(again[i].replicate_std == doctest::Approx(base[i].replicate_std));
        }
    }
}

TEST_CASE("categorize thresholds and boundaries") {
    CHECK(categorize(0.5) == ToxicityCategory::VeryToxic);
    CHECK(categorize(1.0) == ToxicityCategory::VeryToxic); // boundary inclusive
    CHECK(categorize(1.0000001) == ToxicityCategory::Toxic);
    CHECK(categorize(10.0) == ToxicityCategory::Toxic);
    CHECK(categorize(100.0) == ToxicityCategory::Harmful);
    CHECK(categorize(500.0) == ToxicityCategory::MaybeHarmful);
    CHECK_THROWS_AS(categorize(0.0), DomainError);
    CHECK_THROWS_AS(categorize(-1.0), DomainError);
}

TEST_CASE("categorize is monotone in concentration") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const double a = std::pow(10.0, rng.uniform() * 6.0 - 3.0);
        const double b = std::pow(10.0, rng.uniform() * 6.0 - 3.0);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(category_ordinal(categorize(lo)) <= category_ordinal(categorize(hi)));
    }
}

TEST_CASE("target strictly decreases as the median grows") {
    double prev_target = 1e9;
    for (double c : {0.01, 0.1, 1.0, 3.0, 50.0, 900.0}) {
        const auto samples = aggregate({mor(0, 1, c), mor(0, 1, c), mor(0, 1, c)});
        CHECK(samples[0].target < prev_target);
        prev_target = samples[0].target;
    }
}

TEST_CASE("replicate_std histogram bins by width") {
    std::vector<AggregatedSample> samples(3);
    samples[0].replicate_std = 0.2;
    samples[1].replicate_std = 0.2;
    samples[2].replicate_std = 1.5;
    const Histogram h = replicate_std_distribution(samples, 0.5);
    REQUIRE(h.counts.size() == 2);
    CHECK(h.counts.at(0) == 2); // [0, 0.5)
    CHECK(h.counts.at(3) == 1); // [1.5, 2)
    CHECK(h.to_csv() == "bin_low,bin_high,count\n0,0.5,2\n1.5,2,1\n");
}

TEST_CASE("replicate_std histogram of empty input is empty") {
    CHECK(replicate_std_distribution({}, 0.5).counts.empty());
}

TEST_CASE("all-zero spreads land in one bin") {
    std::vector<AggregatedSample> samples(4);
    const Histogram h = replicate_std_distribution(samples, 0.1);
    REQUIRE(h.counts.size() == 1);
    CHECK(h.counts.at(0) == 4);
}

TEST_CASE("effects TSV round-trips") {
    KnowledgeGraph kg;
    const NodeId chem = kg.intern_node(Term::iri("http://x/c"));
    const NodeId spec = kg.intern_node(Term::iri("http://x/s"));
    std::vector<EffectRecord> in = {
        record(chem, spec, Endpoint::LC50, EffectKind::MOR, 2.25, ConcentrationUnit::UgPerL, 96),
        record(chem, spec, Endpoint::EC50, EffectKind::Other, 7.0, ConcentrationUnit::MgPerL, 24),
    };
    const std::string tsv = effects_to_tsv(kg, in);
    const auto out = effects_from_tsv(kg, tsv);
    REQUIRE(out.size() == 2);
    CHECK(out[0].concentration == 2.25);
    CHECK(out[0].unit == ConcentrationUnit::UgPerL);
    CHECK(out[1].effect == EffectKind::Other);
    CHECK(out[1].duration_hours == 24.0);
}

TEST_CASE("effects TSV rejects malformed rows") {
    KnowledgeGraph kg;
    CHECK_THROWS_AS(effects_from_tsv(kg, "a\tb\tc\n"), ParseError);
    CHECK_THROWS_AS(
        effects_from_tsv(kg, "c\ts\tLC50\tMOR\t-1\tmg/L\t48\n"), ParseError);
}
