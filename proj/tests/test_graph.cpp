#include "doctest.h"

#include <set>

#include "exnet/graph.hpp"
#include "test_helpers.hpp"

using namespace exnet;
using namespace exnet::testutil;

TEST_CASE("validate accepts a balanced binary tree") {
    const ExnetGraph g = balanced_tree(8);
    CHECK(validate_exnet(g).valid());
    CHECK(g.vertex_count() == 15);
    CHECK(g.leaves().size() == 8);
    CHECK(g.arc_count() == 14);
}

TEST_CASE("validate flags two parentless vertices") {
    GraphBuilder b;
    auto v = b.add_vertices(4);
    b.set_children(v[0], v[2], v[3]);
    // v[1] is a second parentless vertex
    const auto report = validate_exnet(b.build());
    CHECK_FALSE(report.valid());
    bool found = false;
    for (const auto& viol : report.violations)
        if (viol.rule == "single-root") found = true;
    CHECK(found);
}

TEST_CASE("validate flags a half-filled child slot") {
    GraphBuilder b;
    auto v = b.add_vertices(3);
    b.set_left_child(v[0], v[1]);
    b.set_children(v[1], v[2], v[2]);
    const auto report = validate_exnet(b.build());
    bool found = false;
    for (const auto& viol : report.violations)
        if (viol.rule == "binary-children" && viol.subject == "v0") found = true;
    CHECK(found);
}

TEST_CASE("sibling swaps the two child slots") {
    GraphBuilder b;
    const VertexId z = b.add_vertex();
    const VertexId a = b.add_vertex();
    const VertexId c = b.add_vertex();
    const VertexId other = b.add_vertex();
    b.set_children(z, a, c);
    b.set_children(other, a, c);  // keeps `other` out of leaf bookkeeping concerns
    const ExnetGraph g = b.build();

    CHECK(sibling(g, z, a) == c);
    CHECK(sibling(g, z, c) == a);
    CHECK_THROWS_AS(sibling(g, z, other), std::invalid_argument);
}

TEST_CASE("sibling is an involution over every arc") {
    const auto d = diamond_dag();
    for (ArcId a = 0; a < d.graph.arc_count(); ++a) {
        const Arc& arc = d.graph.arc(a);
        const VertexId s = sibling(d.graph, arc.src, arc.dst);
        CHECK(sibling(d.graph, arc.src, s) == arc.dst);
    }
}

TEST_CASE("sibling handles both slots referencing one vertex") {
    GraphBuilder b;
    const VertexId z = b.add_vertex();
    const VertexId c = b.add_vertex();
    b.set_children(z, c, c);
    const ExnetGraph g = b.build();
    CHECK(sibling(g, z, c) == c);
    CHECK(g.arc_count() == 2);
    CHECK(g.sibling_of_arc(g.left_arc(z)) == c);
}

TEST_CASE("normalize splices unary chains down to the surviving leaf") {
    // a -> b -> c: both a and b have a single child, so both are spliced and
    // the leaf c remains as the root.
    RawDag d;
    auto v = d.add_vertices(3);
    d.add_arc(v[0], v[1]);
    d.add_arc(v[1], v[2]);
    const ExnetGraph g = normalize_dag(d);
    CHECK(validate_exnet(g).valid());
    CHECK(g.vertex_count() == 1);
    CHECK(g.root() == v[2]);
    CHECK(g.is_leaf(v[2]));
}

TEST_CASE("normalize splits a 4-child star into two balanced pairs") {
    RawDag d;
    auto v = d.add_vertices(5);
    for (int i = 1; i <= 4; ++i) d.add_arc(v[0], v[i]);
    const ExnetGraph g = normalize_dag(d);
    CHECK(validate_exnet(g).valid());
    // root + 2 fresh intermediates + 4 original leaves
    CHECK(g.vertex_count() == 7);
    CHECK(g.root() == v[0]);
    const VertexId l = g.left_child(v[0]);
    const VertexId r = g.right_child(v[0]);
    CHECK(l >= 5);
    CHECK(r >= 5);
    // insertion-order partition: {1,2} under the left fresh vertex, {3,4} right
    CHECK(g.left_child(l) == v[1]);
    CHECK(g.right_child(l) == v[2]);
    CHECK(g.left_child(r) == v[3]);
    CHECK(g.right_child(r) == v[4]);
}

TEST_CASE("normalize keeps an already valid exnet untouched") {
    RawDag d;
    auto v = d.add_vertices(7);
    d.add_arc(v[0], v[1]);
    d.add_arc(v[0], v[2]);
    d.add_arc(v[1], v[3]);
    d.add_arc(v[1], v[4]);
    d.add_arc(v[2], v[5]);
    d.add_arc(v[2], v[6]);
    const ExnetGraph g = normalize_dag(d);
    CHECK(validate_exnet(g).valid());
    CHECK(g.vertex_count() == 7);
    CHECK(g.root() == v[0]);
    CHECK(g.left_child(v[0]) == v[1]);
    CHECK(g.right_child(v[2]) == v[6]);
}

TEST_CASE("normalize rejects cycles and multi-root input") {
    RawDag cyc;
    auto v = cyc.add_vertices(3);
    cyc.add_arc(v[0], v[1]);
    cyc.add_arc(v[1], v[2]);
    cyc.add_arc(v[2], v[1]);
    CHECK_THROWS_AS(normalize_dag(cyc), std::invalid_argument);

    RawDag multi;
    auto w = multi.add_vertices(3);
    multi.add_arc(w[0], w[2]);
    multi.add_arc(w[1], w[2]);
    CHECK_THROWS_AS(normalize_dag(multi), std::invalid_argument);
}

TEST_CASE("normalize of random DAGs yields valid exnets preserving leaves") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const std::size_t n = 3 + splitmix64(seed) % 198;
        const RawDag raw = random_raw_dag(n, seed);

        std::set<VertexId> raw_leaves;
        for (VertexId v = 0; v < raw.vertex_count(); ++v)
            if (raw.children(v).empty()) raw_leaves.insert(v);

        const ExnetGraph g = normalize_dag(raw);
        CHECK(validate_exnet(g).valid());

        std::set<VertexId> out_leaves(g.leaves().begin(), g.leaves().end());
        CHECK(out_leaves == raw_leaves);

        // every leaf reachable from the root
        std::set<VertexId> reached;
        std::vector<VertexId> stack{g.root()};
        while (!stack.empty()) {
            const VertexId v = stack.back();
            stack.pop_back();
            if (!reached.insert(v).second || g.is_leaf(v)) continue;
            stack.push_back(g.left_child(v));
            stack.push_back(g.right_child(v));
        }
        for (VertexId leaf : out_leaves) CHECK(reached.count(leaf) == 1);
    }
}

TEST_CASE("up_order puts leaves first and parents after children") {
    const ExnetGraph g3 = tiny_tree();
    const auto o3 = up_order(g3);
    REQUIRE(o3.size() == 3);
    CHECK(o3[0] == 1);
    CHECK(o3[1] == 2);
    CHECK(o3[2] == 0);

    const ExnetGraph g = balanced_tree(4);
    const auto o = up_order(g);
    REQUIRE(o.size() == 7);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.is_leaf(o[i]));
    CHECK(o.back() == g.root());
}

TEST_CASE("orders respect precedence on a diamond DAG") {
    const auto d = diamond_dag();
    const auto up = up_order(d.graph);
    CHECK(position_of(up, d.join) < position_of(up, d.m1));
    CHECK(position_of(up, d.join) < position_of(up, d.m2));
    CHECK(up.back() == d.root);

    const auto down = down_order(d.graph);
    REQUIRE(down.size() == 4);  // leaves excluded
    CHECK(down[0] == d.root);
    CHECK(position_of(down, d.m1) < position_of(down, d.join));
    CHECK(position_of(down, d.m2) < position_of(down, d.join));
}

TEST_CASE("orders are precedence-respecting permutations on random exnets") {
    for (std::uint64_t seed = 100; seed < 112; ++seed) {
        const ExnetGraph g = normalize_dag(random_raw_dag(30, seed));
        const auto up = up_order(g);
        CHECK(up.size() == g.vertex_count());
        std::vector<std::size_t> pos(g.capacity(), 0);
        for (std::size_t i = 0; i < up.size(); ++i) pos[up[i]] = i;
        for (ArcId a = 0; a < g.arc_count(); ++a)
            CHECK(pos[g.arc(a).dst] < pos[g.arc(a).src]);

        const auto down = down_order(g);
        CHECK(down.size() == g.internal_count());
        std::vector<std::size_t> dpos(g.capacity(), g.capacity());
        for (std::size_t i = 0; i < down.size(); ++i) dpos[down[i]] = i;
        for (ArcId a = 0; a < g.arc_count(); ++a) {
            if (g.is_leaf(g.arc(a).dst)) continue;
            CHECK(dpos[g.arc(a).src] < dpos[g.arc(a).dst]);
        }
    }
}

TEST_CASE("dot dump lists every vertex and arc once") {
    const ExnetGraph g = balanced_tree(4);
    const std::string dot = to_dot(g);
    std::size_t nodes = 0, edges = 0;
    for (std::size_t at = dot.find("label=\"v"); at != std::string::npos;
         at = dot.find("label=\"v", at + 1))
        ++nodes;
    for (std::size_t at = dot.find("->"); at != std::string::npos;
         at = dot.find("->", at + 1))
        ++edges;
    CHECK(nodes == 7);
    CHECK(edges == 6);
}
