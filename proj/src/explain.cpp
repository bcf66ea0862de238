#include "kgtox/explain.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace kgtox {

SimilarityIndex SimilarityIndex::build(const std::vector<NodeId>& ids, const FeatureMap& features,
                                       bool use_cosine) {
    SimilarityIndex idx;
    idx.use_cosine_ = use_cosine;
    idx.ids_ = ids;
    std::size_t dim = 0;
    for (NodeId id : ids) {
        auto it = features.find(id);
        if (it == features.end()) {
            throw LookupError("no features for entity id " + std::to_string(id));
        }
        if (dim == 0) dim = it->second.size();
        if (it->second.size() != dim) throw DomainError("inconsistent feature width");
    }
    idx.features_ = Matrix(ids.size(), dim);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& v = features.at(ids[i]);
        std::copy(v.begin(), v.end(), idx.features_.row(i).begin());
        idx.index_of_.emplace(ids[i], i);
    }
    return idx;
}

std::size_t SimilarityIndex::index_of(NodeId id) const {
    auto it = index_of_.find(id);
    if (it == index_of_.end()) throw LookupError("entity not in similarity index");
    return it->second;
}

double SimilarityIndex::distance_by_index(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    const auto a = features_.row(i);
    const auto b = features_.row(j);
    if (!use_cosine_) return std::sqrt(squared_distance(a, b));
    const double denom = std::sqrt(dot(a, a)) * std::sqrt(dot(b, b));
    if (denom == 0.0) return 1.0;
    return 1.0 - dot(a, b) / denom;
}

double SimilarityIndex::distance(NodeId a, NodeId b) const {
    return distance_by_index(index_of(a), index_of(b));
}

std::vector<double> SimilarityIndex::distances_from(NodeId e) const {
    const std::size_t i = index_of(e);
    std::vector<double> out(size());
    for (std::size_t j = 0; j < size(); ++j) out[j] = distance_by_index(i, j);
    return out;
}

std::vector<NodeId> SimilarityIndex::nearest(NodeId e, std::size_t n) const {
    const std::size_t i = index_of(e);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(size() - 1);
    for (std::size_t j = 0; j < size(); ++j) {
        if (j != i) order.emplace_back(distance_by_index(i, j), j);
    }
    std::sort(order.begin(), order.end());
    std::vector<NodeId> out;
    out.reserve(std::min(n, order.size()));
    for (std::size_t k = 0; k < std::min(n, order.size()); ++k) {
        out.push_back(ids_[order[k].second]);
    }
    return out;
}

DensityCell radius_density(const SimilarityIndex& chemicals, const SimilarityIndex& species,
                           NodeId chemical, NodeId species_id, double r_chem, double r_species) {
    if (!(r_chem > 0.0) || !(r_species > 0.0)) throw ConfigError("radius must be positive");
    DensityCell cell;
    cell.scale_chemical = r_chem;
    cell.scale_species = r_species;
    for (const double d : chemicals.distances_from(chemical)) {
        if (d < r_chem) ++cell.chemical_neighbours;
    }
    --cell.chemical_neighbours; // self sits at distance 0
    for (const double d : species.distances_from(species_id)) {
        if (d < r_species) ++cell.species_neighbours;
    }
    --cell.species_neighbours;
    return cell;
}

DensityCell depth_density(const KnowledgeGraph& kg, NodeId chemical, NodeId species_id,
                          int depth, const std::function<bool(NodeId)>& has_data) {
    DensityCell cell;
    cell.scale_chemical = depth;
    cell.scale_species = depth;
    cell.chemical_neighbours = kg.leaves_with_data_within_depth(chemical, depth, has_data);
    cell.species_neighbours = kg.leaves_with_data_within_depth(species_id, depth, has_data);
    return cell;
}

DensityMap density_map(std::span<const DensityCell> cells) {
    DensityMap map;
    for (const DensityCell& c : cells) {
        if (c.categorical_error < 0 || c.categorical_error > 3) {
            throw DomainError("categorical error out of range");
        }
        const auto cls = static_cast<std::size_t>(c.categorical_error);
        ++map.class_counts[cls];
        ++map.histograms[cls][{c.chemical_neighbours, c.species_neighbours}];
    }
    return map;
}

std::string DensityMap::class_csv(int error_class) const {
    const auto cls = static_cast<std::size_t>(error_class);
    std::string out = "chem_count,species_count,frequency\n";
    for (const auto& [key, freq] : histograms[cls]) {
        out += std::to_string(key.first) + "," + std::to_string(key.second) + "," +
               std::to_string(freq) + "\n";
    }
    return out;
}

std::string DensityMap::long_csv() const {
    std::string out = "error_class,chem_count,species_count,frequency\n";
    for (std::size_t cls = 0; cls < 4; ++cls) {
        for (const auto& [key, freq] : histograms[cls]) {
            out += std::to_string(cls) + "," + std::to_string(key.first) + "," +
                   std::to_string(key.second) + "," + std::to_string(freq) + "\n";
        }
    }
    return out;
}

ErrorModelResult fit_error_model(const Matrix& distance_features,
                                 std::span<const double> abs_errors, double train_fraction,
                                 std::size_t n_runs, std::uint64_t seed) {
    const std::size_t n = abs_errors.size();
    if (distance_features.rows != n) throw DomainError("error model: shape mismatch");
    if (n < 10) throw DomainError("error model needs at least 10 predictions");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0, 1)");
    }
    if (n_runs == 0) throw ConfigError("n_runs must be positive");

    ErrorModelResult out;
    out.n_runs = n_runs;
    std::vector<double> run_errors;
    std::vector<double> baseline_errors;
    run_errors.reserve(n_runs);

    const std::size_t n_train =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                     train_fraction * static_cast<double>(n))));

    for (std::size_t run = 0; run < n_runs; ++run) {
        Rng rng = Rng(seed).derive(0x6572726fULL + run);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);

        Matrix x_train(n_train, distance_features.cols);
        std::vector<double> y_train(n_train);
        for (std::size_t i = 0; i < n_train; ++i) {
            const auto src = distance_features.row(order[i]);
            std::copy(src.begin(), src.end(), x_train.row(i).begin());
            y_train[i] = abs_errors[order[i]];
        }

        ForestConfig fc;
        fc.seed = splitmix64(seed ^ (0x8badf00dULL + run));
        RandomForestRegressor forest;
        forest.fit(x_train, y_train, fc);

        const double train_mean = mean(y_train);
        double mad = 0.0, baseline_mad = 0.0;
        const std::size_t n_test = n - n_train;
        for (std::size_t i = n_train; i < n; ++i) {
            const double pred = forest.predict_one(distance_features.row(order[i]));
            mad += std::fabs(pred - abs_errors[order[i]]);
            baseline_mad += std::fabs(train_mean - abs_errors[order[i]]);
        }
        run_errors.push_back(mad / static_cast<double>(n_test));
        baseline_errors.push_back(baseline_mad / static_cast<double>(n_test));
    }

    out.mean_test_error = mean(run_errors);
    out.std_test_error = population_std(run_errors);
    out.baseline_mean_error = mean(baseline_errors);

    ForestConfig fc;
    fc.seed = splitmix64(seed ^ 0xf04e5aULL);
    std::vector<double> y(abs_errors.begin(), abs_errors.end());
    out.forest.fit(distance_features, y, fc);
    return out;
}

std::string ErrorModelResult::metrics_json() const {
    nlohmann::json j;
    j["mean_test_error"] = mean_test_error;
    j["std_test_error"] = std_test_error;
    j["baseline_mean_error"] = baseline_mean_error;
    j["n_runs"] = n_runs;
    return j.dump(2) + "\n";
}

std::size_t CommonFacts::fact_count() const {
    std::size_t n = 0;
    for (const CommonFactsRow& row : rows) n += row.objects.size();
    return n;
}

CommonFacts common_facts(const KnowledgeGraph& kg, const SimilarityIndex& index, NodeId entity,
                         std::size_t n) {
    if (n < 1) throw ConfigError("neighbourhood size must be at least 1");
    CommonFacts out;
    out.entity = entity;
    out.n_requested = n;
    out.members.push_back(entity);
    const std::vector<NodeId> neighbours = index.nearest(entity, n);
    out.truncated = neighbours.size() < n;
    out.members.insert(out.members.end(), neighbours.begin(), neighbours.end());

    // facts(e): (predicate, object) pairs with subject e
    auto facts_of = [&kg](NodeId e) {
        std::set<std::pair<RelId, NodeId>> facts;
        for (const Triple& t : kg.triples()) {
            if (t.subject == e) facts.emplace(t.predicate, t.object);
        }
        return facts;
    };

    std::set<std::pair<RelId, NodeId>> shared = facts_of(out.members.front());
    for (std::size_t i = 1; i < out.members.size() && !shared.empty(); ++i) {
        const auto other = facts_of(out.members[i]);
        std::set<std::pair<RelId, NodeId>> kept;
        for (const auto& f : shared) {
            if (other.count(f)) kept.insert(f);
        }
        shared = std::move(kept);
    }

    // group by predicate, objects merged per row
    std::map<RelId, std::vector<NodeId>> by_predicate;
    for (const auto& [p, o] : shared) by_predicate[p].push_back(o);
    for (auto& [p, objects] : by_predicate) {
        std::sort(objects.begin(), objects.end());
        out.rows.push_back({p, objects});
    }
    return out;
}

std::vector<CorrelationRow> fact_error_correlation(
    const KnowledgeGraph& kg, const SimilarityIndex& chemicals, const SimilarityIndex& species,
    std::span<const SampleOutcome> predictions, std::span<const std::size_t> n_values) {
    if (predictions.size() < 3) {
        throw DomainError("fact/error correlation needs at least 3 predictions");
    }
    std::vector<CorrelationRow> rows;
    for (const std::size_t n : n_values) {
        for (const bool chem_side : {true, false}) {
            std::vector<double> counts, errors;
            counts.reserve(predictions.size());
            for (const SampleOutcome& p : predictions) {
                const NodeId entity = chem_side ? p.chemical : p.species;
                const SimilarityIndex& idx = chem_side ? chemicals : species;
                counts.push_back(static_cast<double>(common_facts(kg, idx, entity, n).fact_count()));
                errors.push_back(p.abs_error);
            }
            CorrelationRow row;
            row.n = n;
            row.side = chem_side ? "chemical" : "species";
            row.correlation = pearson(counts, errors);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string correlation_table_csv(std::span<const CorrelationRow> rows) {
    std::string out = "n,side,correlation,p_value,defined\n";
    for (const CorrelationRow& r : rows) {
        out += std::to_string(r.n) + "," + r.side + ",";
        if (r.correlation.defined) {
            out += format_double(r.correlation.r) + "," + format_double(r.correlation.p_value) +
                   ",true\n";
        } else {
            out += ",,false\n";
        }
    }
    return out;
}

std::string common_facts_csv(const KnowledgeGraph& kg,
                             std::span<const SampleOutcome> predictions,
                             const SimilarityIndex& chemicals, const SimilarityIndex& species,
                             std::size_t n) {
    std::string out = "abs_error,categorical_error,entity,predicate,objects\n";
    for (const SampleOutcome& p : predictions) {
        for (const bool chem_side : {true, false}) {
            const NodeId entity = chem_side ? p.chemical : p.species;
            const SimilarityIndex& idx = chem_side ? chemicals : species;
            const CommonFacts cf = common_facts(kg, idx, entity, n);
            for (const CommonFactsRow& row : cf.rows) {
                out += format_double(p.abs_error);
                out += ',';
                out += std::to_string(p.categorical_error);
                out += ',';
                out += kg.node(entity).lexical;
                out += ',';
                out += kg.relation(row.predicate);
                out += ',';
                for (std::size_t i = 0; i < row.objects.size(); ++i) {
                    if (i) out += '|';
                    out += kg.node(row.objects[i]).lexical;
                }
                out += '\n';
            }
        }
    }
    return out;
}

} // namespace kgtox
