#include "kgtox/embed.hpp"

#include "kgtox/errors.hpp"
#include "kgtox/io.hpp"
#include "kgtox/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kgtox {

void TrainingConfig::validate() const {
    if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (n_inits == 0) throw ConfigError("n_inits must be positive");
    if (negatives_per_positive == 0) {
        throw ConfigError("negatives_per_positive must be positive");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

ComplexEmbeddingTable::ComplexEmbeddingTable(std::size_t n_entities, std::size_t n_relations,
                                             std::size_t k)
    : n_entities_(n_entities), n_relations_(n_relations), k_(k) {
    if (k == 0) throw ConfigError("embedding dimension must be positive");
    if (n_entities == 0 || n_relations == 0) {
        throw ConfigError("embedding table needs at least one entity and relation");
    }
    params_.assign(2 * k * (n_entities + n_relations), 0.0);
}

std::size_t ComplexEmbeddingTable::entity_real_offset(NodeId e) const {
    if (e >= n_entities_) throw LookupError("entity id out of range");
    return static_cast<std::size_t>(e) * k_;
}

std::size_t ComplexEmbeddingTable::entity_imag_offset(NodeId e) const {
    return n_entities_ * k_ + entity_real_offset(e);
}

std::size_t ComplexEmbeddingTable::relation_real_offset(RelId p) const {
    if (p >= n_relations_) throw LookupError("relation id out of range");
    return 2 * n_entities_ * k_ + static_cast<std::size_t>(p) * k_;
}

std::size_t ComplexEmbeddingTable::relation_imag_offset(RelId p) const {
    return n_relations_ * k_ + relation_real_offset(p);
}

std::span<double> ComplexEmbeddingTable::entity_real(NodeId e) {
    return {params_.data() + entity_real_offset(e), k_};
}
std::span<double> ComplexEmbeddingTable::entity_imag(NodeId e) {
    return {params_.data() + entity_imag_offset(e), k_};
}
std::span<double> ComplexEmbeddingTable::relation_real(RelId p) {
    return {params_.data() + relation_real_offset(p), k_};
}
std::span<double> ComplexEmbeddingTable::relation_imag(RelId p) {
    return {params_.data() + relation_imag_offset(p), k_};
}
std::span<const double> ComplexEmbeddingTable::entity_real(NodeId e) const {
    return {params_.data() + entity_real_offset(e), k_};
}
std::span<const double> ComplexEmbeddingTable::entity_imag(NodeId e) const {
    return {params_.data() + entity_imag_offset(e), k_};
}
std::span<const double> ComplexEmbeddingTable::relation_real(RelId p) const {
    return {params_.data() + relation_real_offset(p), k_};
}
std::span<const double> ComplexEmbeddingTable::relation_imag(RelId p) const {
    return {params_.data() + relation_imag_offset(p), k_};
}

void ComplexEmbeddingTable::randomize(Rng& rng, double scale) {
    for (double& p : params_) p = rng.normal(0.0, scale);
}

double score_complex(const ComplexEmbeddingTable& table, NodeId s, RelId p, NodeId o) {
    const auto sr = table.entity_real(s);
    const auto si = table.entity_imag(s);
    const auto pr = table.relation_real(p);
    const auto pi = table.relation_imag(p);
    const auto or_ = table.entity_real(o);
    const auto oi = table.entity_imag(o);

    double sum = 0.0;
    for (std::size_t d = 0; d < table.k(); ++d) {
        sum += sr[d] * pr[d] * or_[d] + si[d] * pr[d] * oi[d] + sr[d] * pi[d] * oi[d] -
               si[d] * pi[d] * or_[d];
    }
    return sum;
}

double logistic_loss(double score, int label) {
    if (label != 1 && label != -1) throw DomainError("label must be +1 or -1");
    // softplus(x) = log(1 + exp(x)) = max(x, 0) + log1p(exp(-|x|))
    const double x = -static_cast<double>(label) * score;
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

LabeledTriple corrupt(const Triple& t, std::size_t n_entities, Rng& rng, CorruptMode mode) {
    if (n_entities < 2) {
        throw DomainError("corruption needs at least two entities");
    }
    auto replace = [&](NodeId original) {
        // uniform over all entities except the original
        auto draw = static_cast<NodeId>(rng.uniform_int(n_entities - 1));
        return draw >= original ? draw + 1 : draw;
    };
    Triple out = t;
    switch (mode) {
        case CorruptMode::Subject: out.subject = replace(t.subject); break;
        case CorruptMode::Object: out.object = replace(t.object); break;
        case CorruptMode::Both:
            out.subject = replace(t.subject);
            out.object = replace(t.object);
            break;
    }
    return {out, -1};
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainingConfig& config) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw DomainError("adam_step: shape mismatch");
    }
    ++state.t;
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw TrainingError("non-finite gradient at step " + std::to_string(state.t));
        }
    }
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
}

std::pair<double, std::vector<double>> loss_and_gradient(
    const ComplexEmbeddingTable& table, std::span<const LabeledTriple> batch) {
    std::vector<double> grad(table.parameters().size(), 0.0);
    double total = 0.0;
    const std::size_t k = table.k();

    for (const LabeledTriple& lt : batch) {
        const Triple& t = lt.triple;
        const double score = score_complex(table, t.subject, t.predicate, t.object);
        total += logistic_loss(score, lt.label);

        // d/ds softplus(-y*s) = -y * sigmoid(-y*s)
        const double x = -static_cast<double>(lt.label) * score;
        const double sigmoid = 1.0 / (1.0 + std::exp(-x));
        const double g = -static_cast<double>(lt.label) * sigmoid;

        const auto sr = table.entity_real(t.subject);
        const auto si = table.entity_imag(t.subject);
        const auto pr = table.relation_real(t.predicate);
        const auto pi = table.relation_imag(t.predicate);
        const auto or_ = table.entity_real(t.object);
        const auto oi = table.entity_imag(t.object);

        double* g_sr = grad.data() + table.entity_real_offset(t.subject);
        double* g_si = grad.data() + table.entity_imag_offset(t.subject);
        double* g_pr = grad.data() + table.relation_real_offset(t.predicate);
        double* g_pi = grad.data() + table.relation_imag_offset(t.predicate);
        double* g_or = grad.data() + table.entity_real_offset(t.object);
        double* g_oi = grad.data() + table.entity_imag_offset(t.object);

        for (std::size_t d = 0; d < k; ++d) {
            g_sr[d] += g * (pr[d] * or_[d] + pi[d] * oi[d]);
            g_si[d] += g * (pr[d] * oi[d] - pi[d] * or_[d]);
            g_pr[d] += g * (sr[d] * or_[d] + si[d] * oi[d]);
            g_pi[d] += g * (sr[d] * oi[d] - si[d] * or_[d]);
            g_or[d] += g * (sr[d] * pr[d] - si[d] * pi[d]);
            g_oi[d] += g * (si[d] * pr[d] + sr[d] * pi[d]);
        }
    }
    return {total, std::move(grad)};
}

TrainResult train(const KnowledgeGraph& kg, const TrainingConfig& config) {
    config.validate();
    if (kg.triple_count() == 0) throw TrainingError("cannot train on an empty graph");
    if (kg.node_count() < 2) throw TrainingError("cannot corrupt with fewer than two entities");

    ComplexEmbeddingTable table(kg.node_count(), kg.relation_count(), config.embedding_dim);
    Rng init_rng = Rng(config.seed).derive(0x696e6974);
    table.randomize(init_rng, config.init_scale);

    std::vector<Triple> positives(kg.triples().begin(), kg.triples().end());
    Rng shuffle_rng = Rng(config.seed).derive(0x73687566);
    Rng corrupt_rng = Rng(config.seed).derive(0x636f7272);

    AdamState state(table.parameters().size());
    std::vector<double> curve;
    curve.reserve(config.epochs);
    std::vector<LabeledTriple> batch;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(positives);
        double epoch_loss = 0.0;
        std::size_t epoch_terms = 0;

        for (std::size_t start = 0; start < positives.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, positives.size());
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back({positives[i], +1});
                for (std::size_t neg = 0; neg < config.negatives_per_positive; ++neg) {
                    // alternate which side gets replaced
                    const CorruptMode mode =
                        (i + neg) % 2 == 0 ? CorruptMode::Subject : CorruptMode::Object;
                    batch.push_back(corrupt(positives[i], kg.node_count(), corrupt_rng, mode));
                }
            }
            auto [loss, grad] = loss_and_gradient(table, batch);
            if (!std::isfinite(loss)) {
                throw TrainingError("training diverged at epoch " + std::to_string(epoch));
            }
            epoch_loss += loss;
            epoch_terms += batch.size();
            adam_step(table.parameters(), grad, state, config);
        }
        curve.push_back(epoch_loss / static_cast<double>(epoch_terms));
    }
    return {std::move(table), std::move(curve)};
}

std::vector<TrainResult> train_inits(const KnowledgeGraph& kg, const TrainingConfig& config) {
    config.validate();
    std::vector<TrainResult> results;
    results.reserve(config.n_inits);
    for (std::size_t i = 0; i < config.n_inits; ++i) {
        TrainingConfig c = config;
        c.seed = splitmix64(config.seed ^ splitmix64(0x1b873593 + i));
        results.push_back(train(kg, c));
    }
    return results;
}

std::vector<double> entity_features(const std::vector<ComplexEmbeddingTable>& tables, NodeId e) {
    if (tables.empty()) throw DomainError("no embedding tables");
    const std::size_t k = tables.front().k();
    for (const auto& t : tables) {
        if (t.k() != k || t.n_entities() != tables.front().n_entities()) {
            throw DomainError("embedding tables have mismatched shapes");
        }
    }
    std::vector<double> out;
    out.reserve(tables.size() * 2 * k);
    for (const auto& t : tables) {
        const auto re = t.entity_real(e);
        const auto im = t.entity_imag(e);
        out.insert(out.end(), re.begin(), re.end());
        out.insert(out.end(), im.begin(), im.end());
    }
    return out;
}

std::vector<double> random_features(NodeId e, std::size_t dim, std::uint64_t seed) {
    Rng rng = Rng(seed).derive(0x72616e64ULL ^ (static_cast<std::uint64_t>(e) << 20));
    std::vector<double> out(dim);
    for (double& x : out) x = rng.normal();
    return out;
}

double link_prediction_auc(const ComplexEmbeddingTable& table,
                           std::span<const Triple> held_out, std::size_t n_entities,
                           Rng& rng) {
    std::vector<double> pos_scores;
    std::vector<double> neg_scores;
    pos_scores.reserve(held_out.size());
    neg_scores.reserve(held_out.size());
    std::size_t i = 0;
    for (const Triple& t : held_out) {
        pos_scores.push_back(score_complex(table, t.subject, t.predicate, t.object));
        const CorruptMode mode = i++ % 2 == 0 ? CorruptMode::Subject : CorruptMode::Object;
        const LabeledTriple neg = corrupt(t, n_entities, rng, mode);
        neg_scores.push_back(
            score_complex(table, neg.triple.subject, neg.triple.predicate, neg.triple.object));
    }
    return auc(pos_scores, neg_scores);
}

namespace {

std::string term_to_field(const Term& t) {
    if (t.is_iri()) return "<" + t.lexical + ">";
    std::string out = "\"";
    for (char ch : t.lexical) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        out.push_back(ch);
    }
    out += '"';
    if (!t.datatype.empty()) out += "^^<" + t.datatype + ">";
    return out;
}

} // namespace

std::string table_to_csv(const KnowledgeGraph& kg, const ComplexEmbeddingTable& table) {
    std::string out = "term";
    for (std::size_t d = 0; d < table.k(); ++d) out += ",re_" + std::to_string(d);
    for (std::size_t d = 0; d < table.k(); ++d) out += ",im_" + std::to_string(d);
    out += '\n';
    for (NodeId e = 0; e < kg.node_count(); ++e) {
        out += term_to_field(kg.node(e));
        for (double v : table.entity_real(e)) {
            out += ',';
            out += format_double(v);
        }
        for (double v : table.entity_imag(e)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string features_to_csv(const KnowledgeGraph& kg,
                            const std::vector<ComplexEmbeddingTable>& tables) {
    if (tables.empty()) throw DomainError("no embedding tables");
    const std::size_t dim = tables.size() * tables.front().feature_width();
    std::string out = "term";
    for (std::size_t d = 0; d < dim; ++d) out += ",f_" + std::to_string(d);
    out += '\n';
    for (NodeId e = 0; e < kg.node_count(); ++e) {
        out += term_to_field(kg.node(e));
        for (double v : entity_features(tables, e)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::pair<Term, std::vector<double>>> features_from_csv(const std::string& text) {
    std::vector<std::pair<Term, std::vector<double>>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            expected_cols = split(line, ',').size() - 1;
            continue;
        }
        // the term field may contain commas; floats never do, so split from
        // the right
        std::vector<double> values(expected_cols);
        std::size_t end = line.size();
        for (std::size_t col = expected_cols; col > 0; --col) {
            const std::size_t comma = line.rfind(',', end - 1);
            if (comma == std::string::npos) {
                throw ParseError(line_no, "too few columns in features CSV");
            }
            try {
                values[col - 1] = std::stod(line.substr(comma + 1, end - comma - 1));
            } catch (const std::exception&) {
                throw ParseError(line_no, "bad float in features CSV");
            }
            end = comma;
        }
        const std::string term_field = line.substr(0, end);
        Term term;
        if (!term_field.empty() && term_field.front() == '<' && term_field.back() == '>') {
            term = Term::iri(term_field.substr(1, term_field.size() - 2));
        } else if (!term_field.empty() && term_field.front() == '"') {
            std::string lexical;
            std::size_t i = 1;
            while (i < term_field.size() && term_field[i] != '"') {
                if (term_field[i] == '\\' && i + 1 < term_field.size()) ++i;
                lexical.push_back(term_field[i]);
                ++i;
            }
            std::string datatype;
            const std::size_t caret = term_field.find("^^<", i);
            if (caret != std::string::npos && term_field.back() == '>') {
                datatype = term_field.substr(caret + 3, term_field.size() - caret - 4);
            }
            term = Term::literal(std::move(lexical), std::move(datatype));
        } else {
            throw ParseError(line_no, "bad term field in features CSV");
        }
        out.emplace_back(std::move(term), std::move(values));
    }
    return out;
}

} // namespace kgtox
