#include "kgtox/eval.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/io.hpp"
#include "kgtox/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

namespace kgtox {

double r_squared(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw DomainError("r_squared: length mismatch");
    if (y.empty()) throw DomainError("r_squared: empty input");
    const double y_bar = mean(y);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
        ss_tot += (y[i] - y_bar) * (y[i] - y_bar);
    }
    if (ss_tot == 0.0) throw DomainError("r_squared undefined for constant targets");
    return 1.0 - ss_res / ss_tot;
}

double categorical_accuracy(std::span<const int> true_cats, std::span<const int> pred_cats) {
    if (true_cats.size() != pred_cats.size()) {
        throw DomainError("categorical_accuracy: length mismatch");
    }
    if (true_cats.empty()) throw DomainError("categorical_accuracy: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < true_cats.size(); ++i) {
        if (true_cats[i] < 0 || true_cats[i] > 3 || pred_cats[i] < 0 || pred_cats[i] > 3) {
            throw DomainError("category out of range");
        }
        sum += 1.0 / (1.0 + std::abs(true_cats[i] - pred_cats[i]));
    }
    return sum / static_cast<double>(true_cats.size());
}

int category_of_target(double target) {
    return category_ordinal(categorize(std::pow(10.0, -target)));
}

namespace {

Matrix pairwise_squared_distances(const Matrix& x) {
    Matrix d(x.rows, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = i + 1; j < x.rows; ++j) {
            const double v = squared_distance(x.row(i), x.row(j));
            d.at(i, j) = v;
            d.at(j, i) = v;
        }
    }
    return d;
}

Matrix kernel_from_distances(const Matrix& d, std::span<const std::size_t> rows,
                             std::span<const std::size_t> cols, double gamma) {
    Matrix k(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            k.at(i, j) = std::exp(-gamma * d.at(rows[i], cols[j]));
        }
    }
    return k;
}

} // namespace

GridChoice grid_search(const Matrix& squared_dist, std::span<const double> targets,
                       std::span<const std::size_t> inner_fold_of,
                       const GridSearchConfig& config) {
    const std::size_t n = targets.size();
    if (squared_dist.rows != n || squared_dist.cols != n) {
        throw DomainError("grid_search: distance matrix shape mismatch");
    }
    if (inner_fold_of.size() != n) throw DomainError("grid_search: fold map size mismatch");
    const std::size_t n_folds =
        n == 0 ? 0 : *std::max_element(inner_fold_of.begin(), inner_fold_of.end()) + 1;
    if (n_folds < 2) throw ConfigError("grid_search needs at least two inner folds");

    std::vector<std::vector<std::size_t>> train_idx(n_folds), val_idx(n_folds);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < n_folds; ++f) {
            (inner_fold_of[i] == f ? val_idx[f] : train_idx[f]).push_back(i);
        }
    }

    GridChoice best;
    bool have_best = false;

    for (int ce = config.exp_min; ce <= config.exp_max; ++ce) {
        for (int ge = config.exp_min; ge <= config.exp_max; ++ge) {
            SvrConfig svr;
            svr.C = std::pow(10.0, ce);
            svr.gamma = std::pow(10.0, ge);
            svr.epsilon = config.epsilon;
            svr.tolerance = config.tolerance;
            svr.max_iterations = config.max_iterations;

            GridChoice candidate;
            candidate.C = svr.C;
            candidate.gamma = svr.gamma;

            double r2_sum = 0.0;
            std::size_t r2_count = 0;
            bool failed = false;
            for (std::size_t f = 0; f < n_folds && !failed; ++f) {
                if (train_idx[f].size() < 2 || val_idx[f].empty()) continue;
                std::vector<double> y_train, y_val;
                for (std::size_t i : train_idx[f]) y_train.push_back(targets[i]);
                for (std::size_t i : val_idx[f]) y_val.push_back(targets[i]);

                const Matrix k_train =
                    kernel_from_distances(squared_dist, train_idx[f], train_idx[f], svr.gamma);
                SvrSolution sol;
                try {
                    sol = svr_solve_kernel(k_train, y_train, svr);
                } catch (const ConvergenceError&) {
                    failed = true;
                    break;
                }
                const Matrix k_val =
                    kernel_from_distances(squared_dist, val_idx[f], train_idx[f], svr.gamma);
                std::vector<double> preds(val_idx[f].size());
                for (std::size_t r = 0; r < k_val.rows; ++r) {
                    preds[r] = predict_kernel_row(sol, k_val.row(r));
                }
                try {
                    r2_sum += r_squared(y_val, preds);
                    ++r2_count;
                } catch (const DomainError&) {
                    // constant validation targets: fold is uninformative
                }
            }
            ++best.candidates_tried;
            if (failed || r2_count == 0) continue;
            ++best.candidates_converged;

            const double mean_r2 = r2_sum / static_cast<double>(r2_count);
            // strict >: earlier candidates (smaller C, then smaller gamma) win ties
            if (!have_best || mean_r2 > best.mean_r2) {
                const std::size_t tried = best.candidates_tried;
                const std::size_t conv = best.candidates_converged;
                best = candidate;
                best.mean_r2 = mean_r2;
                best.candidates_tried = tried;
                best.candidates_converged = conv;
                have_best = true;
            }
        }
    }
    if (!have_best) {
        throw ConvergenceError(best.candidates_tried, "no grid candidate converged");
    }
    return best;
}

GridChoice grid_search(const Matrix& features, std::span<const double> targets,
                       const GridSearchConfig& config, Rng& rng) {
    const std::size_t n = targets.size();
    if (features.rows != n) throw DomainError("grid_search: feature/target mismatch");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<std::size_t> fold_of(n);
    for (std::size_t r = 0; r < n; ++r) fold_of[order[r]] = r % config.inner_folds;
    return grid_search(pairwise_squared_distances(features), targets, fold_of, config);
}

void ProtocolConfig::validate() const {
    if (n_repeats == 0) throw ConfigError("n_repeats must be positive");
    if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
    if (inner_folds < 2) throw ConfigError("inner_folds must be at least 2");
    if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
    if (grid_exp_min > grid_exp_max) throw ConfigError("grid exponent range inverted");
}

namespace {

struct RepeatOutcome {
    std::vector<double> predictions; // aligned with samples
    RepeatMetrics metrics;
    std::size_t redraws = 0;
};

// One full grouped 5-fold pass: plan folds, tune, fit, predict out-of-fold.
RepeatOutcome run_one_repeat(const std::vector<AggregatedSample>& samples,
                             const Matrix& pair_features,
                             const std::vector<std::string>& group_of_sample,
                             const GroupAssignment& groups, const ProtocolConfig& config,
                             Rng rng) {
    const std::size_t n = samples.size();

    std::map<std::string, std::size_t> weights;
    for (const std::string& g : group_of_sample) ++weights[g];

    RepeatOutcome out;
    std::vector<std::size_t> fold_of_sample(n);
    for (std::size_t attempt = 0;; ++attempt) {
        if (attempt >= config.max_redraws) {
            throw GroupingError("could not draw a fold plan with nonempty test folds");
        }
        const GroupedFoldPlan plan = make_fold_plan(groups, weights, config.n_folds, rng);
        std::vector<std::size_t> per_fold(config.n_folds, 0);
        for (std::size_t i = 0; i < n; ++i) {
            fold_of_sample[i] = plan.fold_of(group_of_sample[i]);
            ++per_fold[fold_of_sample[i]];
        }
        if (std::all_of(per_fold.begin(), per_fold.end(),
                        [](std::size_t c) { return c > 0; })) {
            break;
        }
        ++out.redraws;
    }

    out.predictions.assign(n, 0.0);
    const std::size_t dim = pair_features.cols;

    for (std::size_t fold = 0; fold < config.n_folds; ++fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < n; ++i) {
            (fold_of_sample[i] == fold ? test_rows : train_rows).push_back(i);
        }

        // standardize with training-fold statistics only
        std::vector<double> mu(dim, 0.0), sigma(dim, 0.0);
        for (std::size_t i : train_rows) {
            const auto row = pair_features.row(i);
            for (std::size_t d = 0; d < dim; ++d) mu[d] += row[d];
        }
        for (double& m : mu) m /= static_cast<double>(train_rows.size());
        for (std::size_t i : train_rows) {
            const auto row = pair_features.row(i);
            for (std::size_t d = 0; d < dim; ++d) {
                sigma[d] += (row[d] - mu[d]) * (row[d] - mu[d]);
            }
        }
        for (double& s : sigma) {
            s = std::sqrt(s / static_cast<double>(train_rows.size()));
            if (s < 1e-12) s = 1.0;
        }

        Matrix x_train(train_rows.size(), dim), x_test(test_rows.size(), dim);
        std::vector<double> y_train;
        y_train.reserve(train_rows.size());
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            const auto src = pair_features.row(train_rows[r]);
            for (std::size_t d = 0; d < dim; ++d) x_train.at(r, d) = (src[d] - mu[d]) / sigma[d];
            y_train.push_back(samples[train_rows[r]].target);
        }
        for (std::size_t r = 0; r < test_rows.size(); ++r) {
            const auto src = pair_features.row(test_rows[r]);
            for (std::size_t d = 0; d < dim; ++d) x_test.at(r, d) = (src[d] - mu[d]) / sigma[d];
        }

        const Matrix d_train = pairwise_squared_distances(x_train);

        GridSearchConfig gs;
        gs.exp_min = config.grid_exp_min;
        gs.exp_max = config.grid_exp_max;
        gs.inner_folds = config.inner_folds;
        gs.epsilon = config.epsilon;
        gs.tolerance = config.svr_tolerance;
        gs.max_iterations = config.svr_max_iterations;

        std::vector<std::size_t> order(train_rows.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::vector<std::size_t> inner_fold_of(train_rows.size());
        for (std::size_t r = 0; r < order.size(); ++r) {
            inner_fold_of[order[r]] = r % config.inner_folds;
        }
        const GridChoice choice = grid_search(d_train, y_train, inner_fold_of, gs);

        SvrConfig svr;
        svr.C = choice.C;
        svr.gamma = choice.gamma;
        svr.epsilon = config.epsilon;
        svr.tolerance = config.svr_tolerance;
        svr.max_iterations = config.svr_max_iterations;

        std::vector<std::size_t> all_train(train_rows.size());
        std::iota(all_train.begin(), all_train.end(), 0);
        const Matrix k_train = kernel_from_distances(d_train, all_train, all_train, svr.gamma);
        const SvrSolution sol = svr_solve_kernel(k_train, y_train, svr);

        for (std::size_t r = 0; r < test_rows.size(); ++r) {
            std::vector<double> k_row(train_rows.size());
            for (std::size_t c = 0; c < train_rows.size(); ++c) {
                k_row[c] = std::exp(-svr.gamma * squared_distance(x_test.row(r), x_train.row(c)));
            }
            out.predictions[test_rows[r]] = predict_kernel_row(sol, k_row);
        }
    }

    std::vector<double> y_true;
    std::vector<int> c_true, c_pred;
    y_true.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        y_true.push_back(samples[i].target);
        c_true.push_back(category_of_target(samples[i].target));
        c_pred.push_back(category_of_target(out.predictions[i]));
    }
    out.metrics.r2 = r_squared(y_true, out.predictions);
    out.metrics.ca = categorical_accuracy(c_true, c_pred);
    return out;
}

} // namespace

EvaluationReport run_protocol(const std::vector<AggregatedSample>& samples,
                              const FeatureMap& features, const GroupAssignment& groups,
                              const ProtocolConfig& config, const std::string& source_name) {
    config.validate();
    if (samples.empty()) throw DomainError("run_protocol: no samples");

    // ids must be covered by both the feature table and the group assignment
    std::size_t dim = 0;
    for (const AggregatedSample& s : samples) {
        for (NodeId id : {s.chemical, s.species}) {
            auto it = features.find(id);
            if (it == features.end()) {
                throw LookupError("no features for entity id " + std::to_string(id));
            }
            if (dim == 0) dim = it->second.size();
            if (it->second.size() != dim) throw DomainError("inconsistent feature width");
        }
    }

    std::vector<std::string> group_of_sample;
    group_of_sample.reserve(samples.size());
    for (const AggregatedSample& s : samples) {
        const NodeId key = groups.kind == GroupKind::ChemicalCluster ? s.chemical : s.species;
        auto it = groups.label_of.find(key);
        if (it == groups.label_of.end()) {
            throw LookupError("no group label for entity id " + std::to_string(key));
        }
        group_of_sample.push_back(it->second);
    }

    Matrix pair_features(samples.size(), 2 * dim);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& chem = features.at(samples[i].chemical);
        const auto& spec = features.at(samples[i].species);
        auto row = pair_features.row(i);
        std::copy(chem.begin(), chem.end(), row.begin());
        std::copy(spec.begin(), spec.end(), row.begin() + static_cast<std::ptrdiff_t>(dim));
    }

    std::vector<RepeatOutcome> outcomes(config.n_repeats);
    std::size_t n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
    n_threads = std::max<std::size_t>(1, std::min(n_threads, config.n_repeats));

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= config.n_repeats) return;
            try {
                Rng rng = Rng(config.seed).derive(0x7265ULL * 1000 + r);
                outcomes[r] = run_one_repeat(samples, pair_features, group_of_sample, groups,
                                             config, rng);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EvaluationReport report;
    report.feature_source = source_name;
    std::vector<double> r2s, cas;
    for (const RepeatOutcome& o : outcomes) {
        report.per_repeat.push_back(o.metrics);
        r2s.push_back(o.metrics.r2);
        cas.push_back(o.metrics.ca);
        report.redraws += o.redraws;
    }
    report.r2_mean = mean(r2s);
    report.r2_std = population_std(r2s);
    report.ca_mean = mean(cas);
    report.ca_std = population_std(cas);

    report.per_sample.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        SampleOutcome& so = report.per_sample[i];
        so.chemical = samples[i].chemical;
        so.species = samples[i].species;
        so.true_target = samples[i].target;
        double sum = 0.0;
        for (const RepeatOutcome& o : outcomes) sum += o.predictions[i];
        so.mean_prediction = sum / static_cast<double>(outcomes.size());
        so.abs_error = std::fabs(so.true_target - so.mean_prediction);
        so.true_category = category_of_target(so.true_target);
        so.predicted_category = category_of_target(so.mean_prediction);
        so.categorical_error = std::abs(so.true_category - so.predicted_category);
    }
    return report;
}

std::string EvaluationReport::to_json() const {
    nlohmann::json j;
    j["feature_source"] = feature_source;
    j["n_repeats"] = per_repeat.size();
    j["redraws"] = redraws;
    j["r2"] = {{"mean", r2_mean}, {"std", r2_std}};
    j["ca"] = {{"mean", ca_mean}, {"std", ca_std}};
    nlohmann::json reps = nlohmann::json::array();
    for (const RepeatMetrics& m : per_repeat) {
        reps.push_back({{"r2", m.r2}, {"ca", m.ca}});
    }
    j["per_repeat"] = reps;
    return j.dump(2) + "\n";
}

std::string EvaluationReport::per_sample_csv(const KnowledgeGraph& kg) const {
    std::string out =
        "chemical,species,true_target,mean_prediction,abs_error,true_category,"
        "predicted_category,categorical_error\n";
    for (const SampleOutcome& s : per_sample) {
        out += kg.node(s.chemical).lexical;
        out += ',';
        out += kg.node(s.species).lexical;
        out += ',';
        out += format_double(s.true_target);
        out += ',';
        out += format_double(s.mean_prediction);
        out += ',';
        out += format_double(s.abs_error);
        out += ',';
        out += std::to_string(s.true_category);
        out += ',';
        out += std::to_string(s.predicted_category);
        out += ',';
        out += std::to_string(s.categorical_error);
        out += '\n';
    }
    return out;
}

} // namespace kgtox
