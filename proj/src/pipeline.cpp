#include "kgtox/pipeline.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/explain.hpp"
#include "kgtox/io.hpp"
#include "kgtox/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace kgtox {

namespace {

std::uint64_t parse_u64(const std::string& v) {
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("bad integer value: " + v);
    }
}

double parse_f64(const std::string& v) {
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw ConfigError("bad float value: " + v);
    }
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean value: " + v);
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
    std::vector<T> out;
    for (const std::string& part : split(v, ',')) {
        const std::string p = trim(part);
        if (!p.empty()) out.push_back(parse(p));
    }
    return out;
}

} // namespace

void RunConfig::apply_seed() {
    synth.seed = seed;
    training.seed = splitmix64(seed ^ 0x656d6265ULL);
    protocol.seed = splitmix64(seed ^ 0x6576616cULL);
}

void RunConfig::validate() const {
    if (mode != "species" && mode != "chemical") {
        throw ConfigError("mode must be 'species' or 'chemical'");
    }
    synth.validate();
    training.validate();
    protocol.validate();
    if (out_dir.empty()) throw ConfigError("output directory must be set");
    if (common_facts_n == 0) throw ConfigError("common_facts_n must be positive");
    for (int d : depths) {
        if (d < 0) throw ConfigError("depths must be nonnegative");
    }
    for (double r : radii) {
        if (!(r > 0.0)) throw ConfigError("radii must be positive");
    }
}

std::string RunConfig::canonical_string() const {
    std::string s;
    auto kv = [&s](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
    kv("out", out_dir.string());
    kv("mode", mode);
    kv("seed", std::to_string(seed));
    kv("synth.n_species", std::to_string(synth.n_species));
    kv("synth.n_chemicals", std::to_string(synth.n_chemicals));
    kv("synth.species_divisions", std::to_string(synth.species_divisions));
    kv("synth.chemical_clusters", std::to_string(synth.chemical_clusters));
    kv("synth.taxonomy_branching", std::to_string(synth.taxonomy_branching));
    kv("synth.trait_vocabulary_size", std::to_string(synth.trait_vocabulary_size));
    kv("synth.fingerprint_length", std::to_string(synth.fingerprint_length));
    kv("synth.noise_std", format_double(synth.noise_std));
    kv("synth.pair_coverage", format_double(synth.pair_coverage));
    kv("synth.min_replicates", std::to_string(synth.min_replicates));
    kv("synth.max_replicates", std::to_string(synth.max_replicates));
    kv("embedding.dim", std::to_string(training.embedding_dim));
    kv("embedding.epochs", std::to_string(training.epochs));
    kv("embedding.batch_size", std::to_string(training.batch_size));
    kv("embedding.learning_rate", format_double(training.learning_rate));
    kv("embedding.negatives", std::to_string(training.negatives_per_positive));
    kv("embedding.n_inits", std::to_string(training.n_inits));
    kv("embedding.init_scale", format_double(training.init_scale));
    kv("protocol.n_repeats", std::to_string(protocol.n_repeats));
    kv("protocol.n_folds", std::to_string(protocol.n_folds));
    kv("protocol.epsilon", format_double(protocol.epsilon));
    kv("protocol.grid_exp_min", std::to_string(protocol.grid_exp_min));
    kv("protocol.grid_exp_max", std::to_string(protocol.grid_exp_max));
    kv("protocol.inner_folds", std::to_string(protocol.inner_folds));
    kv("explain.common_facts_n", std::to_string(common_facts_n));
    kv("explain.error_model_runs", std::to_string(error_model_runs));
    kv("explain.use_cosine", use_cosine ? "true" : "false");
    kv("explain.histogram_bin_width", format_double(histogram_bin_width));
    auto join_list = [](const auto& xs, auto fmt) {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) out += ",";
            out += fmt(xs[i]);
        }
        return out;
    };
    kv("explain.depths", join_list(depths, [](int d) { return std::to_string(d); }));
    kv("explain.n_values",
       join_list(n_values, [](std::size_t n) { return std::to_string(n); }));
    kv("explain.radii", join_list(radii, [](double r) { return format_double(r); }));
    kv("explain.radius_quantiles",
       join_list(radius_quantiles, [](double q) { return format_double(q); }));
    return s;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;

        if (full == "paths.out" || full == "out") {
            config.out_dir = value;
        } else if (full == "run.mode" || full == "mode" || full == "protocol.mode") {
            config.mode = value;
        } else if (full == "run.seed" || full == "seed") {
            config.seed = parse_u64(value);
        } else if (full == "kg.hierarchy_predicates") {
            config.hierarchy_predicates =
                parse_list<std::string>(value, [](const std::string& v) { return v; });
        } else if (full == "synth.n_species") {
            config.synth.n_species = parse_u64(value);
        } else if (full == "synth.n_chemicals") {
            config.synth.n_chemicals = parse_u64(value);
        } else if (full == "synth.species_divisions") {
            config.synth.species_divisions = parse_u64(value);
        } else if (full == "synth.chemical_clusters") {
            config.synth.chemical_clusters = parse_u64(value);
        } else if (full == "synth.taxonomy_branching") {
            config.synth.taxonomy_branching = parse_u64(value);
        } else if (full == "synth.trait_vocabulary_size") {
            config.synth.trait_vocabulary_size = parse_u64(value);
        } else if (full == "synth.fingerprint_length") {
            config.synth.fingerprint_length = parse_u64(value);
        } else if (full == "synth.noise_std") {
            config.synth.noise_std = parse_f64(value);
        } else if (full == "synth.pair_coverage") {
            config.synth.pair_coverage = parse_f64(value);
        } else if (full == "synth.min_replicates") {
            config.synth.min_replicates = parse_u64(value);
        } else if (full == "synth.max_replicates") {
            config.synth.max_replicates = parse_u64(value);
        } else if (full == "embedding.dim") {
            config.training.embedding_dim = parse_u64(value);
        } else if (full == "embedding.epochs") {
            config.training.epochs = parse_u64(value);
        } else if (full == "embedding.batch_size") {
            config.training.batch_size = parse_u64(value);
        } else if (full == "embedding.learning_rate") {
            config.training.learning_rate = parse_f64(value);
        } else if (full == "embedding.negatives_per_positive") {
            config.training.negatives_per_positive = parse_u64(value);
        } else if (full == "embedding.n_inits") {
            config.training.n_inits = parse_u64(value);
        } else if (full == "embedding.init_scale") {
            config.training.init_scale = parse_f64(value);
        } else if (full == "protocol.n_repeats") {
            config.protocol.n_repeats = parse_u64(value);
        } else if (full == "protocol.n_folds") {
            config.protocol.n_folds = parse_u64(value);
        } else if (full == "protocol.epsilon") {
            config.protocol.epsilon = parse_f64(value);
        } else if (full == "protocol.grid_exp_min") {
            config.protocol.grid_exp_min = static_cast<int>(std::stol(value));
        } else if (full == "protocol.grid_exp_max") {
            config.protocol.grid_exp_max = static_cast<int>(std::stol(value));
        } else if (full == "protocol.inner_folds") {
            config.protocol.inner_folds = parse_u64(value);
        } else if (full == "protocol.threads") {
            config.protocol.threads = parse_u64(value);
        } else if (full == "protocol.svr_max_iterations") {
            config.protocol.svr_max_iterations = parse_u64(value);
        } else if (full == "explain.radii") {
            if (value != "auto") config.radii = parse_list<double>(value, parse_f64);
        } else if (full == "explain.radius_quantiles") {
            config.radius_quantiles = parse_list<double>(value, parse_f64);
        } else if (full == "explain.depths") {
            config.depths = parse_list<int>(
                value, [](const std::string& v) { return static_cast<int>(std::stol(v)); });
        } else if (full == "explain.n_values") {
            config.n_values = parse_list<std::size_t>(
                value, [](const std::string& v) { return std::stoull(v); });
        } else if (full == "explain.common_facts_n") {
            config.common_facts_n = parse_u64(value);
        } else if (full == "explain.error_model_runs") {
            config.error_model_runs = parse_u64(value);
        } else if (full == "explain.error_model_train_fraction") {
            config.error_model_train_fraction = parse_f64(value);
        } else if (full == "explain.use_cosine") {
            config.use_cosine = parse_bool(value);
        } else if (full == "explain.histogram_bin_width") {
            config.histogram_bin_width = parse_f64(value);
        } else {
            throw ConfigError("unknown config key: " + full);
        }
    }
    config.apply_seed();
    return config;
}

RunConfig load_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_file(path));
}

namespace {

void require_file(const std::filesystem::path& path, const std::string& role) {
    if (!std::filesystem::exists(path)) {
        throw IoError("missing " + role + ": " + path.string());
    }
}

KnowledgeGraph load_run_kg(const RunConfig& config) {
    require_file(config.kg_file(), "knowledge graph file");
    KnowledgeGraph kg = load_ntriples_file(config.kg_file().string());
    kg.set_hierarchy_predicates(config.hierarchy_predicates);
    return kg;
}

std::vector<AggregatedSample> load_samples(const RunConfig& config, KnowledgeGraph& kg) {
    require_file(config.effects_file(), "effects file");
    const auto records = load_effects_file(kg, config.effects_file().string());
    return aggregate(normalize_records(filter_records(records)));
}

std::vector<NodeId> distinct_sorted(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

FeatureMap load_feature_map(const RunConfig& config, const KnowledgeGraph& kg) {
    require_file(config.features_file(), "features file");
    FeatureMap map;
    for (auto& [term, values] : features_from_csv(read_file(config.features_file()))) {
        if (auto id = kg.find_node(term)) map[*id] = std::move(values);
    }
    return map;
}

// Per-sample CSV written by cmd_evaluate, read back for explanations.
std::vector<SampleOutcome> load_per_sample_csv(const KnowledgeGraph& kg,
                                               const std::filesystem::path& path) {
    require_file(path, "evaluation per-sample file");
    std::vector<SampleOutcome> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line_no == 1) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 8) throw ParseError(line_no, "expected 8 columns");
        SampleOutcome s;
        const auto chem = kg.find_node(Term::iri(cols[0]));
        const auto spec = kg.find_node(Term::iri(cols[1]));
        if (!chem || !spec) throw ParseError(line_no, "entity not present in the graph");
        s.chemical = *chem;
        s.species = *spec;
        s.true_target = parse_f64(cols[2]);
        s.mean_prediction = parse_f64(cols[3]);
        s.abs_error = parse_f64(cols[4]);
        s.true_category = static_cast<int>(std::stol(cols[5]));
        s.predicted_category = static_cast<int>(std::stol(cols[6]));
        s.categorical_error = static_cast<int>(std::stol(cols[7]));
        out.push_back(s);
    }
    return out;
}

GroupAssignment build_groups(const RunConfig& config, KnowledgeGraph& kg,
                             const std::vector<AggregatedSample>& samples,
                             std::vector<std::filesystem::path>* outputs) {
    if (config.mode == "species") {
        std::vector<NodeId> species;
        for (const AggregatedSample& s : samples) species.push_back(s.species);
        return species_divisions(kg, distinct_sorted(std::move(species)));
    }
    require_file(config.fingerprints_file(), "fingerprints file (chemical mode)");
    auto fps = fingerprints_from_tsv(kg, read_file(config.fingerprints_file()));
    if (outputs) {
        const auto dist_path = config.out_dir / "fingerprint_distances.csv";
        write_file_atomic(dist_path, fingerprint_distances_csv(kg, fps));
        outputs->push_back(dist_path);
    }
    return cluster_chemicals(fps, config.synth.chemical_clusters);
}

} // namespace

CommandResult cmd_generate(const RunConfig& config) {
    config.validate();
    const SynthResult synth = generate(config.synth);

    CommandResult result;
    auto emit = [&](const std::filesystem::path& p, const std::string& content) {
        write_file_atomic(p, content);
        result.outputs.push_back(p);
    };
    emit(config.kg_file(), synth.kg.serialize_ntriples());
    emit(config.effects_file(), effects_to_tsv(synth.kg, synth.records));
    emit(config.fingerprints_file(), fingerprints_to_tsv(synth.kg, synth.fingerprints));
    emit(config.out_dir / "latent_model.json", synth.latent.to_json());
    emit(config.out_dir / "kg_stats.json", synth.kg.stats().to_json());
    return result;
}

CommandResult cmd_embed(const RunConfig& config) {
    config.validate();
    KnowledgeGraph kg = load_run_kg(config);

    const std::vector<TrainResult> runs = train_inits(kg, config.training);

    CommandResult result;
    std::vector<ComplexEmbeddingTable> tables;
    nlohmann::json manifest;
    manifest["k"] = config.training.embedding_dim;
    manifest["n_inits"] = config.training.n_inits;
    manifest["epochs"] = config.training.epochs;
    manifest["seed"] = config.training.seed;
    manifest["learning_rate"] = config.training.learning_rate;
    nlohmann::json curves = nlohmann::json::array();

    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto table_path = config.out_dir / ("embedding_table_" + std::to_string(i) + ".csv");
        write_file_atomic(table_path, table_to_csv(kg, runs[i].table));
        result.outputs.push_back(table_path);

        std::string curve_csv = "epoch,mean_loss\n";
        for (std::size_t e = 0; e < runs[i].epoch_mean_loss.size(); ++e) {
            curve_csv += std::to_string(e) + "," + format_double(runs[i].epoch_mean_loss[e]) + "\n";
        }
        const auto curve_path = config.out_dir / ("loss_curve_" + std::to_string(i) + ".csv");
        write_file_atomic(curve_path, curve_csv);
        result.outputs.push_back(curve_path);

        curves.push_back(runs[i].epoch_mean_loss);
        tables.push_back(runs[i].table);
    }
    manifest["loss_curves"] = curves;

    write_file_atomic(config.features_file(), features_to_csv(kg, tables));
    result.outputs.push_back(config.features_file());

    const auto manifest_path = config.out_dir / "embedding_manifest.json";
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    result.outputs.push_back(manifest_path);
    return result;
}

CommandResult cmd_evaluate(const RunConfig& config) {
    config.validate();
    KnowledgeGraph kg = load_run_kg(config);
    const std::vector<AggregatedSample> samples = load_samples(config, kg);
    if (samples.empty()) throw DomainError("no aggregated samples to evaluate");

    CommandResult result;
    auto emit = [&](const std::filesystem::path& p, const std::string& content) {
        write_file_atomic(p, content);
        result.outputs.push_back(p);
    };

    emit(config.out_dir / "aggregated_samples.csv", samples_to_csv(kg, samples));
    emit(config.out_dir / "std_histogram.csv",
         replicate_std_distribution(samples, config.histogram_bin_width).to_csv());

    const GroupAssignment groups = build_groups(config, kg, samples, &result.outputs);
    emit(config.out_dir / ("groups_" + config.mode + ".csv"), assignment_to_csv(kg, groups));

    Rng plan_rng = Rng(config.protocol.seed).derive(0xf01d);
    std::map<std::string, std::size_t> weights;
    for (const AggregatedSample& s : samples) {
        const NodeId key = groups.kind == GroupKind::ChemicalCluster ? s.chemical : s.species;
        ++weights[groups.label_of.at(key)];
    }
    emit(config.out_dir / "fold_plan_example.json",
         make_fold_plan(groups, weights, config.protocol.n_folds, plan_rng).to_json());

    // embedding arm
    const FeatureMap embedding_features = load_feature_map(config, kg);
    std::vector<std::string> missing;
    for (const AggregatedSample& s : samples) {
        for (NodeId id : {s.chemical, s.species}) {
            if (embedding_features.count(id) == 0) missing.push_back(kg.node(id).lexical);
        }
    }
    if (!missing.empty()) {
        std::string msg = "entities without embedding features:";
        for (const auto& m : missing) msg += " " + m;
        throw LookupError(msg);
    }
    const std::size_t feature_dim =
        embedding_features.begin()->second.size(); // same dim for the random arm

    const EvaluationReport emb_report =
        run_protocol(samples, embedding_features, groups, config.protocol, "embedding");
    emit(config.out_dir / "report_embedding.json", emb_report.to_json());
    emit(config.out_dir / "per_sample_embedding.csv", emb_report.per_sample_csv(kg));

    // random-projection arm over the identical sample set
    FeatureMap random_feature_map;
    for (const AggregatedSample& s : samples) {
        for (NodeId id : {s.chemical, s.species}) {
            if (!random_feature_map.count(id)) {
                random_feature_map[id] = random_features(id, feature_dim, config.seed);
            }
        }
    }
    const EvaluationReport rnd_report =
        run_protocol(samples, random_feature_map, groups, config.protocol, "random_projection");
    emit(config.out_dir / "report_random_projection.json", rnd_report.to_json());
    emit(config.out_dir / "per_sample_random_projection.csv", rnd_report.per_sample_csv(kg));

    return result;
}

CommandResult cmd_explain(const RunConfig& config) {
    config.validate();
    KnowledgeGraph kg = load_run_kg(config);
    const std::vector<AggregatedSample> samples = load_samples(config, kg);
    const std::vector<SampleOutcome> predictions =
        load_per_sample_csv(kg, config.out_dir / "per_sample_embedding.csv");
    if (predictions.empty()) throw DomainError("no predictions to explain");

    CommandResult result;
    auto emit = [&](const std::filesystem::path& p, const std::string& content) {
        write_file_atomic(p, content);
        result.outputs.push_back(p);
    };

    std::vector<NodeId> chem_ids, species_ids;
    for (const SampleOutcome& p : predictions) {
        chem_ids.push_back(p.chemical);
        species_ids.push_back(p.species);
    }
    chem_ids = distinct_sorted(std::move(chem_ids));
    species_ids = distinct_sorted(std::move(species_ids));

    const FeatureMap features = load_feature_map(config, kg);
    const SimilarityIndex chem_index = SimilarityIndex::build(chem_ids, features, config.use_cosine);
    const SimilarityIndex species_index =
        SimilarityIndex::build(species_ids, features, config.use_cosine);

    // radius sweep: explicit radii, or per-side distance quantiles
    std::vector<std::pair<double, double>> radius_pairs;
    if (!config.radii.empty()) {
        for (double r : config.radii) radius_pairs.emplace_back(r, r);
    } else {
        auto quantile_of = [](const SimilarityIndex& idx, double q) {
            std::vector<double> d;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                for (std::size_t j = i + 1; j < idx.size(); ++j) {
                    d.push_back(idx.distance_by_index(i, j));
                }
            }
            std::sort(d.begin(), d.end());
            if (d.empty()) return 1.0;
            const auto pos = static_cast<std::size_t>(q * static_cast<double>(d.size() - 1));
            return std::max(d[pos], 1e-9);
        };
        for (double q : config.radius_quantiles) {
            radius_pairs.emplace_back(quantile_of(chem_index, q), quantile_of(species_index, q));
        }
    }

    for (std::size_t ri = 0; ri < radius_pairs.size(); ++ri) {
        const auto [r_chem, r_species] = radius_pairs[ri];
        std::vector<DensityCell> cells;
        cells.reserve(predictions.size());
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            DensityCell cell = radius_density(chem_index, species_index, predictions[i].chemical,
                                              predictions[i].species, r_chem, r_species);
            cell.prediction_index = i;
            cell.categorical_error = predictions[i].categorical_error;
            cells.push_back(cell);
        }
        const DensityMap map = density_map(cells);
        const std::string tag = "radius_" + std::to_string(ri);
        emit(config.out_dir / ("density_" + tag + ".csv"), map.long_csv());
        for (int cls = 0; cls < 4; ++cls) {
            emit(config.out_dir / ("density_" + tag + "_error" + std::to_string(cls) + ".csv"),
                 map.class_csv(cls));
        }
    }

    // graph-depth densities, data-bearing leaves only
    std::set<NodeId> has_data_set;
    for (const AggregatedSample& s : samples) {
        has_data_set.insert(s.chemical);
        has_data_set.insert(s.species);
    }
    const auto has_data = [&has_data_set](NodeId id) { return has_data_set.count(id) > 0; };
    for (const int depth : config.depths) {
        std::vector<DensityCell> cells;
        cells.reserve(predictions.size());
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            DensityCell cell = depth_density(kg, predictions[i].chemical, predictions[i].species,
                                             depth, has_data);
            cell.prediction_index = i;
            cell.categorical_error = predictions[i].categorical_error;
            cells.push_back(cell);
        }
        const DensityMap map = density_map(cells);
        const std::string tag = "depth_" + std::to_string(depth);
        emit(config.out_dir / ("density_" + tag + ".csv"), map.long_csv());
        for (int cls = 0; cls < 4; ++cls) {
            emit(config.out_dir / ("density_" + tag + "_error" + std::to_string(cls) + ".csv"),
                 map.class_csv(cls));
        }
    }

    // random-forest error model over distance vectors
    Matrix distance_features(predictions.size(), chem_index.size() + species_index.size());
    std::vector<double> abs_errors(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        auto row = distance_features.row(i);
        const auto chem_d = chem_index.distances_from(predictions[i].chemical);
        const auto spec_d = species_index.distances_from(predictions[i].species);
        std::copy(chem_d.begin(), chem_d.end(), row.begin());
        std::copy(spec_d.begin(), spec_d.end(),
                  row.begin() + static_cast<std::ptrdiff_t>(chem_d.size()));
        abs_errors[i] = predictions[i].abs_error;
    }
    const ErrorModelResult error_model =
        fit_error_model(distance_features, abs_errors, config.error_model_train_fraction,
                        config.error_model_runs, splitmix64(config.seed ^ 0x6572724dULL));
    emit(config.out_dir / "error_model.json", error_model.metrics_json());

    emit(config.out_dir / "common_facts.csv",
         common_facts_csv(kg, predictions, chem_index, species_index, config.common_facts_n));

    const auto correlation_rows =
        fact_error_correlation(kg, chem_index, species_index, predictions, config.n_values);
    emit(config.out_dir / "fact_error_correlation.csv", correlation_table_csv(correlation_rows));

    return result;
}

CommandResult cmd_all(const RunConfig& config) {
    const std::pair<const char*, CommandResult (*)(const RunConfig&)> steps[] = {
        {"generate", cmd_generate},
        {"embed", cmd_embed},
        {"evaluate", cmd_evaluate},
        {"explain", cmd_explain},
    };
    CommandResult all;
    for (const auto& [name, fn] : steps) {
        const CommandResult r = fn(config);
        write_manifest(config, name, r);
        all.outputs.insert(all.outputs.end(), r.outputs.begin(), r.outputs.end());
        all.outputs.push_back(config.out_dir / ("manifest_" + std::string(name) + ".json"));
    }
    return all;
}

void write_manifest(const RunConfig& config, const std::string& command,
                    const CommandResult& result) {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = fnv1a_hex(config.canonical_string());
    j["seed"] = config.seed;
    j["mode"] = config.mode;
    std::vector<std::string> outputs;
    for (const auto& p : result.outputs) outputs.push_back(p.filename().string());
    std::sort(outputs.begin(), outputs.end());
    j["outputs"] = outputs;
    write_file_atomic(config.out_dir / ("manifest_" + command + ".json"), j.dump(2) + "\n");

    for (const auto& p : result.outputs) {
        if (!std::filesystem::exists(p)) {
            throw IoError("declared output missing: " + p.string());
        }
    }
}

} // namespace kgtox
