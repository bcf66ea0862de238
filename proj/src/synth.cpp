#include "kgtox/synth.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace kgtox {

namespace {

using namespace synth_vocab;

const char* kDivisionNames[] = {"Fish",  "Crustaceans",  "InsectsSpiders", "Amphibians",
                                "Worms", "Invertebrates", "Molluscs"};

const char* kHabitatNames[] = {"freshwater", "marine",  "brackish", "estuary",
                               "soil",       "sediment", "wetland",  "coastal"};
const char* kRegionNames[] = {"north_atlantic", "north_pacific", "arctic",    "nearctic",
                              "palearctic",     "neotropic",     "afrotropic", "oceania"};

std::string division_name(std::size_t d) {
    if (d < std::size(kDivisionNames)) return kDivisionNames[d];
    return "Division" + std::to_string(d);
}

std::string trait_iri(std::size_t index) {
    const std::size_t n_hab = std::size(kHabitatNames);
    const std::size_t n_reg = std::size(kRegionNames);
    if (index < n_hab) {
        return std::string("http://kgtox.example/trait/") + kHabitatNames[index];
    }
    if (index < n_hab + n_reg) {
        return std::string("http://kgtox.example/trait/") + kRegionNames[index - n_hab];
    }
    return "http://kgtox.example/trait/t" + std::to_string(index);
}

bool trait_is_habitat(std::size_t index) { return index < std::size(kHabitatNames); }

std::string pad4(std::size_t i) {
    std::string s = std::to_string(i);
    while (s.size() < 4) s.insert(s.begin(), '0');
    return s;
}

// Bottom-up tree over `leaves`: runs of `branching` children per parent,
// repeated until everything hangs off `root`.
void build_tree(KnowledgeGraph& kg, const std::vector<NodeId>& leaves, NodeId root,
                const std::string& level_prefix, const std::string& predicate,
                std::size_t branching) {
    std::vector<NodeId> current = leaves;
    std::size_t level = 1;
    while (true) {
        if (current.size() <= branching) {
            for (NodeId child : current) kg.add(child, kg.intern_relation(predicate), root);
            return;
        }
        const std::size_t n_parents = (current.size() + branching - 1) / branching;
        std::vector<NodeId> parents;
        parents.reserve(n_parents);
        for (std::size_t p = 0; p < n_parents; ++p) {
            const std::string iri =
                level_prefix + "_L" + std::to_string(level) + "_" + std::to_string(p);
            parents.push_back(kg.intern_node(Term::iri(iri)));
        }
        for (std::size_t i = 0; i < current.size(); ++i) {
            kg.add(current[i], kg.intern_relation(predicate), parents[i / branching]);
        }
        current = std::move(parents);
        ++level;
    }
}

// Counts per bucket when n items are spread as evenly as possible.
std::vector<std::size_t> spread(std::size_t n, std::size_t buckets) {
    std::vector<std::size_t> out(buckets, n / buckets);
    for (std::size_t i = 0; i < n % buckets; ++i) ++out[i];
    return out;
}

} // namespace

void SynthConfig::validate() const {
    if (n_species == 0 || n_chemicals == 0 || species_divisions == 0 ||
        chemical_clusters == 0 || trait_vocabulary_size == 0 || fingerprint_length == 0) {
        throw ConfigError("all synth counts must be positive");
    }
    if (n_species < species_divisions) {
        throw ConfigError("need at least one species per division");
    }
    if (n_chemicals < chemical_clusters) {
        throw ConfigError("need at least one chemical per cluster");
    }
    if (taxonomy_branching < 2) throw ConfigError("taxonomy_branching must be >= 2");
    if (!(pair_coverage > 0.0 && pair_coverage <= 1.0)) {
        throw ConfigError("pair_coverage must be in (0, 1]");
    }
    if (min_replicates < 3) throw ConfigError("min_replicates must be >= 3");
    if (max_replicates < min_replicates) throw ConfigError("max_replicates < min_replicates");
    if (noise_std < 0.0) throw ConfigError("noise_std must be nonnegative");
}

double LatentModel::latent_log10(const std::string& species_iri,
                                 const std::string& chemical_iri) const {
    const auto div_it = division_of_species.find(species_iri);
    const auto clu_it = cluster_of_chemical.find(chemical_iri);
    if (div_it == division_of_species.end()) throw LookupError("unknown species " + species_iri);
    if (clu_it == cluster_of_chemical.end()) throw LookupError("unknown chemical " + chemical_iri);
    return baseline + division_offset.at(div_it->second) + cluster_offset.at(clu_it->second) +
           division_interaction.at(div_it->second) * cluster_interaction.at(clu_it->second);
}

std::string LatentModel::to_json() const {
    nlohmann::json j;
    j["baseline"] = baseline;
    j["noise_std"] = noise_std;
    j["division_offset"] = division_offset;
    j["cluster_offset"] = cluster_offset;
    j["division_interaction"] = division_interaction;
    j["cluster_interaction"] = cluster_interaction;
    j["division_of_species"] = division_of_species;
    j["cluster_of_chemical"] = cluster_of_chemical;
    return j.dump(2) + "\n";
}

LatentModel LatentModel::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    LatentModel m;
    m.baseline = j.at("baseline").get<double>();
    m.noise_std = j.at("noise_std").get<double>();
    m.division_offset = j.at("division_offset").get<std::map<std::string, double>>();
    m.cluster_offset = j.at("cluster_offset").get<std::map<std::string, double>>();
    m.division_interaction = j.at("division_interaction").get<std::map<std::string, double>>();
    m.cluster_interaction = j.at("cluster_interaction").get<std::map<std::string, double>>();
    m.division_of_species = j.at("division_of_species").get<std::map<std::string, std::string>>();
    m.cluster_of_chemical = j.at("cluster_of_chemical").get<std::map<std::string, std::string>>();
    return m;
}

SynthResult generate(const SynthConfig& config) {
    config.validate();

    Rng base(config.seed);
    Rng taxonomy_rng = base.derive(1);
    Rng trait_rng = base.derive(2);
    Rng chem_rng = base.derive(3);
    Rng fp_rng = base.derive(4);
    Rng latent_rng = base.derive(5);
    Rng effect_rng = base.derive(6);

    SynthResult out;
    KnowledgeGraph& kg = out.kg;
    kg.set_hierarchy_predicates({kParentTaxon, kParentClass});

    const RelId rel_type = kg.intern_relation(kRdfType);
    const RelId rel_habitat = kg.intern_relation(kHabitat);
    const RelId rel_present = kg.intern_relation(kPresentIn);
    const RelId rel_feature = kg.intern_relation(kHasFeature);
    const RelId rel_heavy = kg.intern_relation(kIsHeavy);
    const NodeId vertebrate = kg.intern_node(Term::iri("http://kgtox.example/class/Vertebrate"));
    const NodeId invertebrate =
        kg.intern_node(Term::iri("http://kgtox.example/class/Invertebrate"));
    const NodeId organic = kg.intern_node(Term::iri("http://kgtox.example/class/OrganicCompound"));

    // --- species taxonomy -------------------------------------------------
    const std::vector<std::size_t> species_per_div =
        spread(config.n_species, config.species_divisions);
    std::vector<NodeId> division_roots;
    std::vector<std::string> division_iris;
    std::size_t species_serial = 0;
    std::vector<std::size_t> division_of_species_idx(config.n_species);

    for (std::size_t d = 0; d < config.species_divisions; ++d) {
        const std::string div_iri = "http://kgtox.example/division/" + division_name(d);
        const NodeId root = kg.intern_node(Term::iri(div_iri));
        division_roots.push_back(root);
        division_iris.push_back(div_iri);

        std::vector<NodeId> leaves;
        for (std::size_t i = 0; i < species_per_div[d]; ++i) {
            const NodeId s = kg.intern_node(
                Term::iri("http://kgtox.example/species/S" + pad4(species_serial)));
            division_of_species_idx[species_serial] = d;
            ++species_serial;
            leaves.push_back(s);
            out.species_ids.push_back(s);
        }
        build_tree(kg, leaves, root, "http://kgtox.example/taxon/" + division_name(d),
                   kParentTaxon, config.taxonomy_branching);

        // Fish and Amphibians are the vertebrate divisions of the canonical set
        const bool is_vertebrate = division_name(d) == "Fish" || division_name(d) == "Amphibians";
        for (NodeId s : leaves) kg.add(s, rel_type, is_vertebrate ? vertebrate : invertebrate);
    }
    (void)taxonomy_rng;

    // --- traits -----------------------------------------------------------
    // Each division asserts a fixed prototype of trait values; every species
    // carries the full prototype plus a couple of individual extras.
    const std::size_t proto_size = std::min<std::size_t>(5, config.trait_vocabulary_size);
    std::vector<std::vector<std::size_t>> division_proto(config.species_divisions);
    for (std::size_t d = 0; d < config.species_divisions; ++d) {
        std::set<std::size_t> picks;
        while (picks.size() < proto_size) {
            picks.insert(trait_rng.uniform_int(config.trait_vocabulary_size));
        }
        division_proto[d].assign(picks.begin(), picks.end());
    }
    std::vector<NodeId> trait_nodes(config.trait_vocabulary_size);
    for (std::size_t t = 0; t < config.trait_vocabulary_size; ++t) {
        trait_nodes[t] = kg.intern_node(Term::iri(trait_iri(t)));
    }
    auto add_trait = [&](NodeId species, std::size_t t) {
        kg.add(species, trait_is_habitat(t) ? rel_habitat : rel_present, trait_nodes[t]);
    };
    for (std::size_t i = 0; i < config.n_species; ++i) {
        for (std::size_t t : division_proto[division_of_species_idx[i]]) {
            add_trait(out.species_ids[i], t);
        }
        for (int extra = 0; extra < 2; ++extra) {
            add_trait(out.species_ids[i], trait_rng.uniform_int(config.trait_vocabulary_size));
        }
    }

    // --- chemicals --------------------------------------------------------
    const std::vector<std::size_t> chems_per_cluster =
        spread(config.n_chemicals, config.chemical_clusters);
    std::vector<std::string> cluster_iris;
    std::size_t chem_serial = 0;
    std::vector<std::size_t> cluster_of_chem_idx(config.n_chemicals);

    for (std::size_t c = 0; c < config.chemical_clusters; ++c) {
        const std::string cl_iri = "http://kgtox.example/chemgroup/G" + std::to_string(c);
        const NodeId root = kg.intern_node(Term::iri(cl_iri));
        cluster_iris.push_back(cl_iri);

        std::vector<NodeId> leaves;
        for (std::size_t i = 0; i < chems_per_cluster[c]; ++i) {
            const NodeId ch = kg.intern_node(
                Term::iri("http://kgtox.example/chemical/C" + pad4(chem_serial)));
            cluster_of_chem_idx[chem_serial] = c;
            ++chem_serial;
            leaves.push_back(ch);
            out.chemical_ids.push_back(ch);
        }
        build_tree(kg, leaves, root, "http://kgtox.example/chemclass/G" + std::to_string(c),
                   kParentClass, config.taxonomy_branching);
        for (NodeId ch : leaves) {
            kg.add(ch, rel_type, organic);
            const bool heavy = chem_rng.uniform() < 0.2;
            kg.add(ch, rel_heavy,
                   kg.intern_node(Term::literal(heavy ? "true" : "false", kXsdBoolean)));
        }
    }

    // --- fingerprints -----------------------------------------------------
    std::vector<Fingerprint> prototypes(config.chemical_clusters);
    for (auto& proto : prototypes) {
        proto.bits.resize(config.fingerprint_length);
        for (auto& b : proto.bits) b = fp_rng.uniform() < 0.3 ? 1 : 0;
    }
    for (std::size_t i = 0; i < config.n_chemicals; ++i) {
        Fingerprint fp = prototypes[cluster_of_chem_idx[i]];
        for (auto& b : fp.bits) {
            if (fp_rng.uniform() < 0.03) b ^= 1;
        }
        out.fingerprints.emplace_back(out.chemical_ids[i], std::move(fp));
    }
    // a few fingerprint positions are mirrored into the graph as attributes
    const std::size_t n_profile_bits = std::min<std::size_t>(16, config.fingerprint_length);
    for (std::size_t j = 0; j < n_profile_bits; ++j) {
        const std::size_t pos = j * config.fingerprint_length / n_profile_bits;
        const NodeId bit_node =
            kg.intern_node(Term::iri("http://kgtox.example/feature/bit" + std::to_string(pos)));
        for (std::size_t i = 0; i < config.n_chemicals; ++i) {
            if (out.fingerprints[i].second.bits[pos]) {
                kg.add(out.chemical_ids[i], rel_feature, bit_node);
            }
        }
    }

    // --- latent model -------------------------------------------------------
    LatentModel& latent = out.latent;
    latent.baseline = 1.0;
    latent.noise_std = config.noise_std;
    std::vector<double> trait_weight(config.trait_vocabulary_size);
    std::vector<double> trait_weight_u(config.trait_vocabulary_size);
    const double tau_w = 0.55 / std::sqrt(static_cast<double>(proto_size));
    const double tau_u = 1.0 / std::sqrt(static_cast<double>(proto_size));
    for (std::size_t t = 0; t < config.trait_vocabulary_size; ++t) {
        trait_weight[t] = latent_rng.normal(0.0, tau_w);
        trait_weight_u[t] = latent_rng.normal(0.0, tau_u);
    }
    for (std::size_t d = 0; d < config.species_divisions; ++d) {
        double offset = 0.0, u = 0.0;
        for (std::size_t t : division_proto[d]) {
            offset += trait_weight[t];
            u += trait_weight_u[t];
        }
        latent.division_offset[division_iris[d]] = offset;
        latent.division_interaction[division_iris[d]] = u;
    }
    for (std::size_t c = 0; c < config.chemical_clusters; ++c) {
        latent.cluster_offset[cluster_iris[c]] = latent_rng.normal(0.0, 0.45);
        latent.cluster_interaction[cluster_iris[c]] = latent_rng.normal(0.0, 0.15);
    }
    for (std::size_t i = 0; i < config.n_species; ++i) {
        latent.division_of_species[kg.node(out.species_ids[i]).lexical] =
            division_iris[division_of_species_idx[i]];
    }
    for (std::size_t i = 0; i < config.n_chemicals; ++i) {
        latent.cluster_of_chemical[kg.node(out.chemical_ids[i]).lexical] =
            cluster_iris[cluster_of_chem_idx[i]];
    }

    // --- effect records -----------------------------------------------------
    const double durations[] = {24.0, 48.0, 72.0, 96.0};
    const Endpoint endpoints[] = {Endpoint::LC50, Endpoint::LD50, Endpoint::EC50};
    for (std::size_t ci = 0; ci < config.n_chemicals; ++ci) {
        for (std::size_t si = 0; si < config.n_species; ++si) {
            if (effect_rng.uniform() >= config.pair_coverage) continue;
            const double mu = latent.latent_log10(kg.node(out.species_ids[si]).lexical,
                                                  kg.node(out.chemical_ids[ci]).lexical);
            const std::size_t n_rep =
                config.min_replicates +
                effect_rng.uniform_int(config.max_replicates - config.min_replicates + 1);
            // unit fixed per pair so exact replicate agreement survives
            // round-tripping through the raw value
            const bool micrograms = effect_rng.uniform() < 0.2;
            for (std::size_t r = 0; r < n_rep; ++r) {
                EffectRecord rec;
                rec.chemical = out.chemical_ids[ci];
                rec.species = out.species_ids[si];
                rec.endpoint = endpoints[effect_rng.uniform_int(3)];
                rec.effect = EffectKind::MOR;
                rec.duration_hours = durations[effect_rng.uniform_int(4)];
                const double log10_mg = mu + (config.noise_std > 0.0
                                                  ? effect_rng.normal(0.0, config.noise_std)
                                                  : 0.0);
                const double mg = std::pow(10.0, log10_mg);
                rec.unit = micrograms ? ConcentrationUnit::UgPerL : ConcentrationUnit::MgPerL;
                rec.concentration = micrograms ? mg * 1000.0 : mg;
                out.records.push_back(rec);
            }
        }
    }
    return out;
}

} // namespace kgtox
