#include "kgtox/errors.hpp"
#include "kgtox/kg.hpp"
#include "kgtox/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace kgtox;

namespace {

const char* kHier = "http://x/sub";

KnowledgeGraph graph_from(const std::string& nt) {
    KnowledgeGraph kg = load_ntriples_string(nt);
    kg.set_hierarchy_predicates({kHier});
    return kg;
}

} // namespace

TEST_CASE("load_ntriples counts distinct triples") {
    const auto kg = load_ntriples_string(
        "<http://x/a> <http://x/p> <http://x/b> .\n"
        "<http://x/a> <http://x/p> \"hello\" .\n"
        "<http://x/b> <http://x/q> \"1.5\"^^<http://www.w3.org/2001/XMLSchema#double> .\n");
    CHECK(kg.triple_count() == 3);
}

TEST_CASE("load_ntriples deduplicates repeated lines") {
    const auto kg = load_ntriples_string(
        "<http://x/a> <http://x/p> <http://x/b> .\n"
        "<http://x/a> <http://x/p> <http://x/b> .\n");
    CHECK(kg.triple_count() == 1);
}

TEST_CASE("load_ntriples reports the offending line") {
    const std::string text =
        "<http://x/a> <http://x/p> <http://x/b> .\n"
        "<http://x/a> <http://x/p> <http://x/b>\n"; // missing '.'
    CHECK_THROWS_AS(load_ntriples_string(text), ParseError);
    try {
        load_ntriples_string(text);
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("load_ntriples rejects literal subjects and garbage") {
    CHECK_THROWS_AS(load_ntriples_string("\"lit\" <http://x/p> <http://x/b> .\n"), ParseError);
    CHECK_THROWS_AS(load_ntriples_string("<http://x/a> <http://x/p> 42 .\n"), ParseError);
    CHECK_THROWS_AS(load_ntriples_string("<http://x/a> <http://x/p> <http://x/b> . junk\n"),
                    ParseError);
}

TEST_CASE("serialize then reload yields the same triple set") {
    Rng rng(123);
    KnowledgeGraph kg;
    for (int i = 0; i < 200; ++i) {
        const auto s = Term::iri("http://x/e" + std::to_string(rng.uniform_int(30)));
        const auto p = "http://x/p" + std::to_string(rng.uniform_int(5));
        Term o;
        switch (rng.uniform_int(3)) {
            case 0: o = Term::iri("http://x/e" + std::to_string(rng.uniform_int(30))); break;
            case 1: o = Term::literal("v " + std::to_string(rng.uniform_int(10))); break;
            default:
                o = Term::literal(std::to_string(rng.uniform_int(100)),
                                  "http://www.w3.org/2001/XMLSchema#integer");
        }
        kg.add(s, p, o);
    }
    const auto reloaded = load_ntriples_string(kg.serialize_ntriples());
    CHECK(reloaded.triple_count() == kg.triple_count());
    CHECK(reloaded.serialize_ntriples() == kg.serialize_ntriples());
}

TEST_CASE("literals with escapes round-trip") {
    KnowledgeGraph kg;
    kg.add(Term::iri("http://x/a"), "http://x/p", Term::literal("line\nbreak \"quoted\" \\ tab\t"));
    const auto reloaded = load_ntriples_string(kg.serialize_ntriples());
    CHECK(reloaded.triple_count() == 1);
    CHECK(reloaded.serialize_ntriples() == kg.serialize_ntriples());
}

TEST_CASE("match_pattern single pattern enumerates matches") {
    const auto kg = graph_from(
        "<http://x/s1> <http://x/type> <http://x/Vertebrate> .\n"
        "<http://x/s2> <http://x/type> <http://x/Vertebrate> .\n"
        "<http://x/s3> <http://x/type> <http://x/Invertebrate> .\n");
    PatternQuery q;
    q.patterns.push_back({PatternSlot::var("s"),
                          PatternSlot::constant(Term::iri("http://x/type")),
                          PatternSlot::constant(Term::iri("http://x/Vertebrate"))});
    q.projection = {"s"};
    const auto rows = match_pattern(kg, q);
    CHECK(rows.size() == 2);
}

TEST_CASE("match_pattern join on shared variable") {
    const auto kg = graph_from(
        "<http://x/s1> <http://x/type> <http://x/Fish> .\n"
        "<http://x/s1> <http://x/livesIn> <http://x/Sea> .\n"
        "<http://x/s2> <http://x/type> <http://x/Fish> .\n"
        "<http://x/s3> <http://x/livesIn> <http://x/Sea> .\n");
    PatternQuery q;
    q.patterns.push_back({PatternSlot::var("s"),
                          PatternSlot::constant(Term::iri("http://x/type")),
                          PatternSlot::constant(Term::iri("http://x/Fish"))});
    q.patterns.push_back({PatternSlot::var("s"),
                          PatternSlot::constant(Term::iri("http://x/livesIn")),
                          PatternSlot::var("where")});
    q.projection = {"s", "where"};
    const auto rows = match_pattern(kg, q);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0].lexical == "http://x/s1");
    CHECK(oracle::same_bindings(rows, oracle::brute_force_join(kg, q)));
}

TEST_CASE("match_pattern over empty graph is empty") {
    KnowledgeGraph kg;
    kg.intern_node(Term::iri("http://x/a")); // node exists, no triples
    PatternQuery q;
    q.patterns.push_back({PatternSlot::var("s"), PatternSlot::var("p"), PatternSlot::var("o")});
    q.projection = {"s"};
    CHECK(match_pattern(kg, q).empty());
}

TEST_CASE("match_pattern rejects unbound projection variables") {
    const auto kg = graph_from("<http://x/a> <http://x/p> <http://x/b> .\n");
    PatternQuery q;
    q.patterns.push_back({PatternSlot::var("s"), PatternSlot::var("p"), PatternSlot::var("o")});
    q.projection = {"nope"};
    CHECK_THROWS_AS(match_pattern(kg, q), QueryError);
}

TEST_CASE("match_pattern equals nested-loop join on random graphs") {
    Rng rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        KnowledgeGraph kg;
        const int n_ent = 12;
        for (int i = 0; i < 120; ++i) {
            kg.add(Term::iri("http://x/e" + std::to_string(rng.uniform_int(n_ent))),
                   "http://x/p" + std::to_string(rng.uniform_int(3)),
                   Term::iri("http://x/e" + std::to_string(rng.uniform_int(n_ent))));
        }
        PatternQuery q;
        q.patterns.push_back({PatternSlot::var("a"),
                              PatternSlot::constant(Term::iri("http://x/p0")),
                              PatternSlot::var("b")});
        q.patterns.push_back({PatternSlot::var("b"),
                              PatternSlot::constant(Term::iri("http://x/p1")),
                              PatternSlot::var("c")});
        q.projection = {"a", "c"};
        CHECK(oracle::same_bindings(match_pattern(kg, q), oracle::brute_force_join(kg, q)));
    }
}

TEST_CASE("hierarchy_ancestors walks a chain with depths") {
    const auto kg = graph_from(
        "<http://x/leaf> <http://x/sub> <http://x/genus> .\n"
        "<http://x/genus> <http://x/sub> <http://x/family> .\n"
        "<http://x/family> <http://x/sub> <http://x/order> .\n");
    const NodeId leaf = *kg.find_node(Term::iri("http://x/leaf"));
    const auto anc = kg.hierarchy_ancestors(leaf, 2);
    REQUIRE(anc.size() == 3);
    CHECK(anc[0] == std::pair{leaf, 0});
    CHECK(kg.node(anc[1].first).lexical == "http://x/genus");
    CHECK(anc[1].second == 1);
    CHECK(kg.node(anc[2].first).lexical == "http://x/family");
    CHECK(anc[2].second == 2);

    const auto only_self = kg.hierarchy_ancestors(leaf, 0);
    REQUIRE(only_self.size() == 1);
    CHECK(only_self[0] == std::pair{leaf, 0});
}

TEST_CASE("hierarchy_ancestors handles multiple parents") {
    const auto kg = graph_from(
        "<http://x/leaf> <http://x/sub> <http://x/p1> .\n"
        "<http://x/leaf> <http://x/sub> <http://x/p2> .\n");
    const NodeId leaf = *kg.find_node(Term::iri("http://x/leaf"));
    const auto anc = kg.hierarchy_ancestors(leaf, 1);
    REQUIRE(anc.size() == 3);
    CHECK(anc[1].second == 1);
    CHECK(anc[2].second == 1);
}

TEST_CASE("hierarchy_ancestors rejects unknown ids") {
    KnowledgeGraph kg;
    CHECK_THROWS_AS(kg.hierarchy_ancestors(5, 1), LookupError);
}

TEST_CASE("hierarchy_ancestors depths match a BFS oracle on random dags") {
    Rng rng(77);
    for (int trial = 0; trial < 6; ++trial) {
        KnowledgeGraph kg;
        const int n = 25;
        std::map<NodeId, std::vector<NodeId>> parents;
        std::vector<NodeId> ids;
        for (int i = 0; i < n; ++i) {
            ids.push_back(kg.intern_node(Term::iri("http://x/n" + std::to_string(i))));
        }
        kg.set_hierarchy_predicates({kHier});
        for (int i = 1; i < n; ++i) {
            // edges only to lower indices: acyclic by construction
            const int n_parents = 1 + static_cast<int>(rng.uniform_int(2));
            for (int p = 0; p < n_parents; ++p) {
                const NodeId parent = ids[rng.uniform_int(static_cast<std::uint64_t>(i))];
                if (kg.add(ids[i], kg.intern_relation(kHier), parent)) {
                    parents[ids[i]].push_back(parent);
                }
            }
        }
        for (int depth : {0, 1, 2, 5}) {
            const auto got = kg.hierarchy_ancestors(ids[n - 1], depth);
            const auto want = oracle::bfs_ancestors(parents, ids[n - 1], depth);
            REQUIRE(got.size() == want.size());
            for (const auto& [id, d] : got) CHECK(want.at(id) == d);
        }
    }
}

TEST_CASE("leaves_with_data_within_depth counts siblings and cousins") {
    // root -> {a, b}; a -> {e, s1}; b -> {c1, c2}
    const auto kg = graph_from(
        "<http://x/a> <http://x/sub> <http://x/root> .\n"
        "<http://x/b> <http://x/sub> <http://x/root> .\n"
        "<http://x/e> <http://x/sub> <http://x/a> .\n"
        "<http://x/s1> <http://x/sub> <http://x/a> .\n"
        "<http://x/c1> <http://x/sub> <http://x/b> .\n"
        "<http://x/c2> <http://x/sub> <http://x/b> .\n");
    const NodeId e = *kg.find_node(Term::iri("http://x/e"));
    const NodeId s1 = *kg.find_node(Term::iri("http://x/s1"));
    const NodeId c1 = *kg.find_node(Term::iri("http://x/c1"));
    const NodeId c2 = *kg.find_node(Term::iri("http://x/c2"));

    SUBCASE("one sibling with data at depth 1") {
        const auto has_data = [&](NodeId id) { return id == s1; };
        CHECK(kg.leaves_with_data_within_depth(e, 1, has_data) == 1);
    }
    SUBCASE("depth reaching the root sees every data leaf except e") {
        const auto has_data = [](NodeId) { return true; };
        CHECK(kg.leaves_with_data_within_depth(e, 5, has_data) == 3);
    }
    SUBCASE("two of the cousins carry data at depth 2") {
        const auto has_data = [&](NodeId id) { return id == c1 || id == c2; };
        CHECK(kg.leaves_with_data_within_depth(e, 2, has_data) == 2);
        // the brute-force subtree enumeration agrees
        std::map<NodeId, std::vector<NodeId>> children;
        for (const Triple& t : kg.triples()) children[t.object].push_back(t.subject);
        const NodeId root = *kg.find_node(Term::iri("http://x/root"));
        std::set<NodeId> expect;
        for (NodeId leaf : oracle::subtree_leaf_set(children, root)) {
            if (leaf != e && (leaf == c1 || leaf == c2)) expect.insert(leaf);
        }
        CHECK(expect.size() == 2);
    }
    SUBCASE("depth 0 restricts to e's own subtree") {
        const auto has_data = [](NodeId) { return true; };
        CHECK(kg.leaves_with_data_within_depth(e, 0, has_data) == 0);
    }
}

TEST_CASE("leaves_with_data_within_depth is monotone in depth") {
    Rng rng(99);
    KnowledgeGraph kg;
    std::vector<NodeId> ids;
    for (int i = 0; i < 40; ++i) {
        ids.push_back(kg.intern_node(Term::iri("http://x/n" + std::to_string(i))));
    }
    kg.set_hierarchy_predicates({kHier});
    for (int i = 1; i < 40; ++i) {
        kg.add(ids[i], kg.intern_relation(kHier),
               ids[rng.uniform_int(static_cast<std::uint64_t>(i))]);
    }
    const auto has_data = [](NodeId id) { return (id * 2654435761u) % 3 == 0; };
    std::size_t prev = 0;
    for (int depth = 0; depth <= 6; ++depth) {
        const std::size_t count = kg.leaves_with_data_within_depth(ids[39], depth, has_data);
        CHECK(count >= prev);
        prev = count;
    }
}

TEST_CASE("stats reports dictionary sizes") {
    const auto kg = graph_from(
        "<http://x/a> <http://x/p> <http://x/b> .\n"
        "<http://x/a> <http://x/q> \"v\" .\n");
    const auto s = kg.stats();
    CHECK(s.triple_count == 2);
    CHECK(s.entity_count == 3);  // a, b, and the literal node
    CHECK(s.relation_count == 3); // p, q, plus the configured hierarchy predicate
}
