#include "kgtox/kg.hpp"

#include "kgtox/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <map>

namespace kgtox {

namespace {

TermKind classify_literal(const std::string& datatype) {
    static const char* kXsd = "http://www.w3.org/2001/XMLSchema#";
    if (datatype.rfind(kXsd, 0) == 0) {
        const std::string local = datatype.substr(std::string(kXsd).size());
        if (local == "boolean") return TermKind::LiteralBoolean;
        if (local == "integer" || local == "decimal" || local == "double" ||
            local == "float" || local == "int" || local == "long" ||
            local == "nonNegativeInteger") {
            return TermKind::LiteralNumber;
        }
    }
    return TermKind::LiteralString;
}

} // namespace

Term Term::iri(std::string value) {
    Term t;
    t.kind = TermKind::Iri;
    t.lexical = std::move(value);
    return t;
}

Term Term::literal(std::string lexical, std::string datatype) {
    Term t;
    t.kind = classify_literal(datatype);
    t.lexical = std::move(lexical);
    t.datatype = std::move(datatype);
    return t;
}

PatternSlot PatternSlot::constant(Term t) {
    PatternSlot s;
    s.is_variable = false;
    s.term = std::move(t);
    return s;
}

PatternSlot PatternSlot::var(std::string name) {
    PatternSlot s;
    s.is_variable = true;
    s.variable = std::move(name);
    return s;
}

std::string KgStats::to_json() const {
    nlohmann::json j;
    j["entity_count"] = entity_count;
    j["relation_count"] = relation_count;
    j["triple_count"] = triple_count;
    return j.dump(2) + "\n";
}

NodeId KnowledgeGraph::intern_node(const Term& t) {
    auto it = node_index_.find(t);
    if (it != node_index_.end()) return it->second;
    const NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(t);
    node_index_.emplace(t, id);
    parents_.emplace_back();
    children_.emplace_back();
    return id;
}

RelId KnowledgeGraph::intern_relation(const std::string& iri) {
    auto it = relation_index_.find(iri);
    if (it != relation_index_.end()) return it->second;
    const RelId id = static_cast<RelId>(relations_.size());
    relations_.push_back(iri);
    relation_index_.emplace(iri, id);
    return id;
}

std::optional<NodeId> KnowledgeGraph::find_node(const Term& t) const {
    auto it = node_index_.find(t);
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelId> KnowledgeGraph::find_relation(const std::string& iri) const {
    auto it = relation_index_.find(iri);
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
}

const Term& KnowledgeGraph::node(NodeId id) const {
    check_node(id);
    return nodes_[id];
}

const std::string& KnowledgeGraph::relation(RelId id) const {
    if (id >= relations_.size()) throw LookupError("unknown relation id");
    return relations_[id];
}

void KnowledgeGraph::check_node(NodeId id) const {
    if (id >= nodes_.size()) {
        throw LookupError("unknown entity id " + std::to_string(id));
    }
}

bool KnowledgeGraph::is_hierarchy_rel(RelId id) const {
    return std::find(hierarchy_rels_.begin(), hierarchy_rels_.end(), id) !=
           hierarchy_rels_.end();
}

bool KnowledgeGraph::add(const Term& subject, const std::string& predicate,
                         const Term& object) {
    if (!subject.is_iri()) throw DomainError("triple subject must be an IRI");
    return add(intern_node(subject), intern_relation(predicate), intern_node(object));
}

bool KnowledgeGraph::add(NodeId subject, RelId predicate, NodeId object) {
    check_node(subject);
    check_node(object);
    if (predicate >= relations_.size()) throw LookupError("unknown relation id");
    if (!nodes_[subject].is_iri()) throw DomainError("triple subject must be an IRI");
    const bool inserted = triples_.insert({subject, predicate, object}).second;
    if (inserted && is_hierarchy_rel(predicate)) {
        parents_[subject].push_back(object);
        children_[object].push_back(subject);
    }
    return inserted;
}

bool KnowledgeGraph::contains(NodeId subject, RelId predicate, NodeId object) const {
    return triples_.count({subject, predicate, object}) > 0;
}

void KnowledgeGraph::set_hierarchy_predicates(const std::vector<std::string>& predicate_iris) {
    hierarchy_iris_ = predicate_iris;
    hierarchy_rels_.clear();
    for (const auto& iri : predicate_iris) {
        hierarchy_rels_.push_back(intern_relation(iri));
    }
    for (auto& v : parents_) v.clear();
    for (auto& v : children_) v.clear();
    for (const Triple& t : triples_) {
        if (is_hierarchy_rel(t.predicate)) {
            parents_[t.subject].push_back(t.object);
            children_[t.object].push_back(t.subject);
        }
    }
}

std::vector<NodeId> KnowledgeGraph::hierarchy_parents(NodeId id) const {
    check_node(id);
    return parents_[id];
}

std::vector<NodeId> KnowledgeGraph::hierarchy_children(NodeId id) const {
    check_node(id);
    return children_[id];
}

bool KnowledgeGraph::is_hierarchy_leaf(NodeId id) const {
    check_node(id);
    return children_[id].empty();
}

std::vector<std::pair<NodeId, int>> KnowledgeGraph::hierarchy_ancestors(
    NodeId e, int max_depth) const {
    check_node(e);
    if (max_depth < 0) throw DomainError("max_depth must be nonnegative");

    std::map<NodeId, int> depth_of;
    std::deque<NodeId> queue;
    depth_of[e] = 0;
    queue.push_back(e);
    while (!queue.empty()) {
        const NodeId cur = queue.front();
        queue.pop_front();
        const int d = depth_of[cur];
        if (d == max_depth) continue;
        for (NodeId parent : parents_[cur]) {
            if (depth_of.count(parent) == 0) {
                depth_of[parent] = d + 1;
                queue.push_back(parent);
            }
        }
    }
    std::vector<std::pair<NodeId, int>> out(depth_of.begin(), depth_of.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    return out;
}

std::vector<NodeId> KnowledgeGraph::subtree_leaves(NodeId id) const {
    check_node(id);
    std::vector<NodeId> leaves;
    std::set<NodeId> seen;
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        const NodeId cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        if (children_[cur].empty()) {
            leaves.push_back(cur);
            continue;
        }
        for (NodeId child : children_[cur]) stack.push_back(child);
    }
    std::sort(leaves.begin(), leaves.end());
    return leaves;
}

std::size_t KnowledgeGraph::leaves_with_data_within_depth(
    NodeId e, int depth, const std::function<bool(NodeId)>& has_data) const {
    check_node(e);
    if (depth < 0) throw DomainError("depth must be nonnegative");

    std::set<NodeId> counted;
    for (const auto& [ancestor, d] : hierarchy_ancestors(e, depth)) {
        (void)d;
        for (NodeId leaf : subtree_leaves(ancestor)) {
            if (leaf != e && has_data(leaf)) counted.insert(leaf);
        }
    }
    return counted.size();
}

KgStats KnowledgeGraph::stats() const {
    return {node_count(), relation_count(), triple_count()};
}

std::vector<BindingRow> match_pattern(const KnowledgeGraph& kg, const PatternQuery& query) {
    if (query.patterns.empty()) throw QueryError("query has no patterns");

    auto pattern_has_var = [](const TriplePattern& p, const std::string& name) {
        return (p.subject.is_variable && p.subject.variable == name) ||
               (p.predicate.is_variable && p.predicate.variable == name) ||
               (p.object.is_variable && p.object.variable == name);
    };
    for (const std::string& var : query.projection) {
        const bool found = std::any_of(
            query.patterns.begin(), query.patterns.end(),
            [&](const TriplePattern& p) { return pattern_has_var(p, var); });
        if (!found) {
            throw QueryError("projection variable ?" + var + " not bound by any pattern");
        }
    }

    std::vector<BindingRow> rows;
    std::map<std::string, Term> binding;

    // Backtracking join over the patterns in query order. Candidate triples
    // are scanned in the store's sorted order, so results are deterministic.
    auto slot_matches = [&](const PatternSlot& slot, const Term& value,
                            std::vector<std::string>& bound_here) {
        if (!slot.is_variable) return slot.term == value;
        auto it = binding.find(slot.variable);
        if (it != binding.end()) return it->second == value;
        binding.emplace(slot.variable, value);
        bound_here.push_back(slot.variable);
        return true;
    };

    std::function<void(std::size_t)> solve = [&](std::size_t pattern_idx) {
        if (pattern_idx == query.patterns.size()) {
            BindingRow row;
            row.reserve(query.projection.size());
            for (const std::string& var : query.projection) row.push_back(binding.at(var));
            rows.push_back(std::move(row));
            return;
        }
        const TriplePattern& pat = query.patterns[pattern_idx];
        for (const Triple& t : kg.triples()) {
            std::vector<std::string> bound_here;
            const bool ok = slot_matches(pat.subject, kg.node(t.subject), bound_here) &&
                            slot_matches(pat.predicate, Term::iri(kg.relation(t.predicate)),
                                         bound_here) &&
                            slot_matches(pat.object, kg.node(t.object), bound_here);
            if (ok) solve(pattern_idx + 1);
            for (const std::string& var : bound_here) binding.erase(var);
        }
    };
    solve(0);
    return rows;
}

} // namespace kgtox
