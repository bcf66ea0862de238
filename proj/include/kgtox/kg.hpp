#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace kgtox {

using NodeId = std::uint32_t;
using RelId = std::uint32_t;

enum class TermKind : std::uint8_t { Iri, LiteralString, LiteralNumber, LiteralBoolean };

// An RDF term: an IRI or a typed literal. Literals compare by exact lexical
// form plus datatype tag; numeric coercion happens downstream, never here.
struct Term {
    TermKind kind = TermKind::Iri;
    std::string lexical;  // IRI text without angle brackets, or literal lexical form
    std::string datatype; // datatype IRI for typed literals, empty otherwise

    static Term iri(std::string value);
    static Term literal(std::string lexical, std::string datatype = "");

    bool is_iri() const { return kind == TermKind::Iri; }
    bool is_literal() const { return kind != TermKind::Iri; }

    bool operator==(const Term&) const = default;
    auto operator<=>(const Term&) const = default;
};

struct Triple {
    NodeId subject;
    RelId predicate;
    NodeId object;

    bool operator==(const Triple&) const = default;
    auto operator<=>(const Triple&) const = default;
};

// One slot of a triple pattern: a constant term or a named variable.
struct PatternSlot {
    bool is_variable = false;
    Term term;
    std::string variable;

    static PatternSlot constant(Term t);
    static PatternSlot var(std::string name);
};

struct TriplePattern {
    PatternSlot subject;
    PatternSlot predicate;
    PatternSlot object;
};

// Conjunctive basic graph pattern. No OPTIONAL/FILTER/UNION; consumers
// post-filter values themselves.
struct PatternQuery {
    std::vector<TriplePattern> patterns;
    std::vector<std::string> projection;
};

struct KgStats {
    std::size_t entity_count = 0;
    std::size_t relation_count = 0;
    std::size_t triple_count = 0;

    std::string to_json() const;
};

// In-memory triple store with dense interned ids. Immutable once loading is
// done; all query paths are const and safe for concurrent readers.
class KnowledgeGraph {
public:
    NodeId intern_node(const Term& t);
    RelId intern_relation(const std::string& iri);
    std::optional<NodeId> find_node(const Term& t) const;
    std::optional<RelId> find_relation(const std::string& iri) const;

    const Term& node(NodeId id) const;
    const std::string& relation(RelId id) const;
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t relation_count() const { return relations_.size(); }
    std::size_t triple_count() const { return triples_.size(); }

    // Set semantics: returns false when the triple is already present.
    bool add(const Term& subject, const std::string& predicate, const Term& object);
    bool add(NodeId subject, RelId predicate, NodeId object);
    bool contains(NodeId subject, RelId predicate, NodeId object) const;

    const std::set<Triple>& triples() const { return triples_; }

    // Hierarchy edges are (child, p, parent) for any configured predicate p.
    void set_hierarchy_predicates(const std::vector<std::string>& predicate_iris);
    const std::vector<std::string>& hierarchy_predicate_iris() const {
        return hierarchy_iris_;
    }

    std::vector<NodeId> hierarchy_parents(NodeId id) const;
    std::vector<NodeId> hierarchy_children(NodeId id) const;
    bool is_hierarchy_leaf(NodeId id) const;

    // Ancestors reachable by walking hierarchy edges upward, paired with their
    // shortest upward edge count; includes (e, 0). Sorted by (depth, id).
    std::vector<std::pair<NodeId, int>> hierarchy_ancestors(NodeId e, int max_depth) const;

    // All leaves of the subtree rooted at id (id itself when it is a leaf).
    std::vector<NodeId> subtree_leaves(NodeId id) const;

    // Leaves L != e with has_data(L) lying under some ancestor of e at
    // distance <= depth. depth 0 restricts to the subtree of e itself.
    std::size_t leaves_with_data_within_depth(
        NodeId e, int depth, const std::function<bool(NodeId)>& has_data) const;

    KgStats stats() const;
    std::string serialize_ntriples() const;

private:
    void check_node(NodeId id) const;
    bool is_hierarchy_rel(RelId id) const;

    std::vector<Term> nodes_;
    std::map<Term, NodeId> node_index_;
    std::vector<std::string> relations_;
    std::map<std::string, RelId> relation_index_;
    std::set<Triple> triples_;

    std::vector<std::string> hierarchy_iris_;
    std::vector<RelId> hierarchy_rels_;
    std::vector<std::vector<NodeId>> parents_;  // child -> parents
    std::vector<std::vector<NodeId>> children_; // parent -> children
};

// Bindings for the projection variables, one row per solution. Bag semantics:
// rows repeat when non-projected variables multiply solutions.
using BindingRow = std::vector<Term>;
std::vector<BindingRow> match_pattern(const KnowledgeGraph& kg, const PatternQuery& query);

// Line-oriented N-Triples subset: `<iri> <iri> (<iri>|"literal"[^^<iri>]) .`
// Blank lines and `#` comment lines are skipped; duplicates deduplicate
// silently. Malformed lines raise ParseError with the line number.
KnowledgeGraph load_ntriples(std::istream& in);
KnowledgeGraph load_ntriples_string(const std::string& text);
KnowledgeGraph load_ntriples_file(const std::string& path);

} // namespace kgtox
