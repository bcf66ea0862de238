#pragma once

#include "kgtox/kg.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace kgtox {

enum class Endpoint : std::uint8_t { LC50, LD50, EC50, Other };
enum class EffectKind : std::uint8_t { MOR, Other };
enum class ConcentrationUnit : std::uint8_t { MgPerL, UgPerL, Other };

Endpoint parse_endpoint(const std::string& s);
EffectKind parse_effect(const std::string& s);
ConcentrationUnit parse_unit(const std::string& s);
std::string to_string(Endpoint e);
std::string to_string(EffectKind e);
std::string to_string(ConcentrationUnit u);

// One experimental result row.
struct EffectRecord {
    NodeId chemical = 0;
    NodeId species = 0;
    Endpoint endpoint = Endpoint::Other;
    EffectKind effect = EffectKind::Other;
    double concentration = 0.0; // > 0, in `unit`
    ConcentrationUnit unit = ConcentrationUnit::Other;
    double duration_hours = 0.0; // > 0
};

// Per-pair aggregate. target == -log10(median_mg_per_l) by construction.
struct AggregatedSample {
    NodeId chemical = 0;
    NodeId species = 0;
    double median_mg_per_l = 0.0;
    double target = 0.0;
    std::size_t n_replicates = 0; // >= 3
    double replicate_std = 0.0;   // population std of log10 concentrations
};

// Regulatory categories, ordered from most to least toxic.
enum class ToxicityCategory : std::uint8_t {
    VeryToxic = 0,   // <= 1 mg/L
    Toxic = 1,       // (1, 10]
    Harmful = 2,     // (10, 100]
    MaybeHarmful = 3 // > 100
};

// Keeps acute mortality rows: endpoint in {LC50, LD50, EC50}, effect MOR,
// unit in {mg/L, ug/L}, duration in [24, 96] hours. Order preserved.
std::vector<EffectRecord> filter_records(const std::vector<EffectRecord>& records);

// mg/L passthrough; ug/L divided by 1000. Other units are an error.
double normalize_unit(double value, ConcentrationUnit unit);

// Returns a copy with concentrations converted to mg/L.
std::vector<EffectRecord> normalize_records(const std::vector<EffectRecord>& records);

// One sample per (chemical, species) pair with >= 3 records; pairs with fewer
// are dropped. Input must already be filtered and unit-normalized. Output is
// sorted by (chemical, species).
std::vector<AggregatedSample> aggregate(const std::vector<EffectRecord>& records);

ToxicityCategory categorize(double concentration_mg_per_l);

inline int category_ordinal(ToxicityCategory c) { return static_cast<int>(c); }

// Fixed-width histogram over replicate standard deviations. Only occupied
// bins are stored; bin k covers [k*width, (k+1)*width).
struct Histogram {
    double bin_width = 0.0;
    std::map<std::size_t, std::size_t> counts;

    std::string to_csv() const; // bin_low,bin_high,count
};

Histogram replicate_std_distribution(const std::vector<AggregatedSample>& samples,
                                     double bin_width);

// TSV with columns: chemical, species, endpoint, effect, concentration, unit,
// duration_hours. A header row is written and tolerated on read.
std::string effects_to_tsv(const KnowledgeGraph& kg, const std::vector<EffectRecord>& records);
std::vector<EffectRecord> effects_from_tsv(KnowledgeGraph& kg, const std::string& text);
std::vector<EffectRecord> load_effects_file(KnowledgeGraph& kg, const std::string& path);

std::string samples_to_csv(const KnowledgeGraph& kg, const std::vector<AggregatedSample>& samples);

} // namespace kgtox
