#include "kgtox/effects.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/io.hpp"
#include "kgtox/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kgtox {

Endpoint parse_endpoint(const std::string& s) {
    if (s == "LC50") return Endpoint::LC50;
    if (s == "LD50") return Endpoint::LD50;
    if (s == "EC50") return Endpoint::EC50;
    return Endpoint::Other;
}

EffectKind parse_effect(const std::string& s) {
    return s == "MOR" ? EffectKind::MOR : EffectKind::Other;
}

ConcentrationUnit parse_unit(const std::string& s) {
    if (s == "mg/L") return ConcentrationUnit::MgPerL;
    if (s == "ug/L") return ConcentrationUnit::UgPerL;
    return ConcentrationUnit::Other;
}

std::string to_string(Endpoint e) {
    switch (e) {
        case Endpoint::LC50: return "LC50";
        case Endpoint::LD50: return "LD50";
        case Endpoint::EC50: return "EC50";
        default: return "other";
    }
}

std::string to_string(EffectKind e) {
    return e == EffectKind::MOR ? "MOR" : "other";
}

std::string to_string(ConcentrationUnit u) {
    switch (u) {
        case ConcentrationUnit::MgPerL: return "mg/L";
        case ConcentrationUnit::UgPerL: return "ug/L";
        default: return "other";
    }
}

std::vector<EffectRecord> filter_records(const std::vector<EffectRecord>& records) {
    std::vector<EffectRecord> kept;
    kept.reserve(records.size());
    for (const EffectRecord& r : records) {
        const bool endpoint_ok = r.endpoint == Endpoint::LC50 ||
                                 r.endpoint == Endpoint::LD50 ||
                                 r.endpoint == Endpoint::EC50;
        const bool unit_ok = r.unit == ConcentrationUnit::MgPerL ||
                             r.unit == ConcentrationUnit::UgPerL;
        const bool duration_ok = r.duration_hours >= 24.0 && r.duration_hours <= 96.0;
        if (endpoint_ok && r.effect == EffectKind::MOR && unit_ok && duration_ok) {
            kept.push_back(r);
        }
    }
    return kept;
}

double normalize_unit(double value, ConcentrationUnit unit) {
    switch (unit) {
        case ConcentrationUnit::MgPerL: return value;
        case ConcentrationUnit::UgPerL: return value / 1000.0;
        default: throw UnitError("unsupported concentration unit");
    }
}

std::vector<EffectRecord> normalize_records(const std::vector<EffectRecord>& records) {
    std::vector<EffectRecord> out = records;
    for (EffectRecord& r : out) {
        r.concentration = normalize_unit(r.concentration, r.unit);
        r.unit = ConcentrationUnit::MgPerL;
    }
    return out;
}

std::vector<AggregatedSample> aggregate(const std::vector<EffectRecord>& records) {
    std::map<std::pair<NodeId, NodeId>, std::vector<double>> by_pair;
    for (const EffectRecord& r : records) {
        by_pair[{r.chemical, r.species}].push_back(r.concentration);
    }

    std::vector<AggregatedSample> out;
    for (auto& [pair, concentrations] : by_pair) {
        if (concentrations.size() < 3) continue;
        AggregatedSample s;
        s.chemical = pair.first;
        s.species = pair.second;
        s.n_replicates = concentrations.size();
        s.median_mg_per_l = median(concentrations);
        s.target = -std::log10(s.median_mg_per_l);
        std::vector<double> logs;
        logs.reserve(concentrations.size());
        for (double c : concentrations) logs.push_back(std::log10(c));
        s.replicate_std = population_std(logs);
        out.push_back(s);
    }
    return out;
}

ToxicityCategory categorize(double concentration_mg_per_l) {
    if (!(concentration_mg_per_l > 0.0)) {
        throw DomainError("concentration must be positive");
    }
    if (concentration_mg_per_l <= 1.0) return ToxicityCategory::VeryToxic;
    if (concentration_mg_per_l <= 10.0) return ToxicityCategory::Toxic;
    if (concentration_mg_per_l <= 100.0) return ToxicityCategory::Harmful;
    return ToxicityCategory::MaybeHarmful;
}

Histogram replicate_std_distribution(const std::vector<AggregatedSample>& samples,
                                     double bin_width) {
    if (!(bin_width > 0.0)) throw ConfigError("bin width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    for (const AggregatedSample& s : samples) {
        const auto bin = static_cast<std::size_t>(std::floor(s.replicate_std / bin_width));
        ++h.counts[bin];
    }
    return h;
}

std::string Histogram::to_csv() const {
    std::string out = "bin_low,bin_high,count\n";
    for (const auto& [bin, count] : counts) {
        out += format_double(static_cast<double>(bin) * bin_width);
        out += ',';
        out += format_double(static_cast<double>(bin + 1) * bin_width);
        out += ',';
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

std::string effects_to_tsv(const KnowledgeGraph& kg, const std::vector<EffectRecord>& records) {
    std::string out = "chemical\tspecies\tendpoint\teffect\tconcentration\tunit\tduration_hours\n";
    for (const EffectRecord& r : records) {
        out += kg.node(r.chemical).lexical;
        out += '\t';
        out += kg.node(r.species).lexical;
        out += '\t';
        out += to_string(r.endpoint);
        out += '\t';
        out += to_string(r.effect);
        out += '\t';
        out += format_double(r.concentration);
        out += '\t';
        out += to_string(r.unit);
        out += '\t';
        out += format_double(r.duration_hours);
        out += '\n';
    }
    return out;
}

std::vector<EffectRecord> effects_from_tsv(KnowledgeGraph& kg, const std::string& text) {
    std::vector<EffectRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("chemical\t", 0) == 0) continue;

        const std::vector<std::string> cols = split(line, '\t');
        if (cols.size() != 7) {
            throw ParseError(line_no, "expected 7 tab-separated columns");
        }
        EffectRecord r;
        r.chemical = kg.intern_node(Term::iri(cols[0]));
        r.species = kg.intern_node(Term::iri(cols[1]));
        r.endpoint = parse_endpoint(cols[2]);
        r.effect = parse_effect(cols[3]);
        try {
            r.concentration = std::stod(cols[4]);
            r.duration_hours = std::stod(cols[6]);
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad numeric field");
        }
        r.unit = parse_unit(cols[5]);
        if (!(r.concentration > 0.0)) throw ParseError(line_no, "concentration must be > 0");
        if (!(r.duration_hours > 0.0)) throw ParseError(line_no, "duration must be > 0");
        out.push_back(r);
    }
    return out;
}

std::vector<EffectRecord> load_effects_file(KnowledgeGraph& kg, const std::string& path) {
    return effects_from_tsv(kg, read_file(path));
}

std::string samples_to_csv(const KnowledgeGraph& kg,
                           const std::vector<AggregatedSample>& samples) {
    std::string out = "chemical,species,median_mg_per_l,target,n_replicates,replicate_std\n";
    for (const AggregatedSample& s : samples) {
        out += kg.node(s.chemical).lexical;
        out += ',';
        out += kg.node(s.species).lexical;
        out += ',';
        out += format_double(s.median_mg_per_l);
        out += ',';
        out += format_double(s.target);
        out += ',';
        out += std::to_string(s.n_replicates);
        out += ',';
        out += format_double(s.replicate_std);
        out += '\n';
    }
    return out;
}

} // namespace kgtox
