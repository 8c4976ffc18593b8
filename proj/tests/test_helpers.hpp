#ifndef EXNET_TEST_HELPERS_HPP
#define EXNET_TEST_HELPERS_HPP

#include <algorithm>
#include <vector>

#include "exnet/graph.hpp"
#include "exnet/rng.hpp"

namespace exnet::testutil {

// root + two leaves
inline ExnetGraph tiny_tree() {
    GraphBuilder b;
    auto v = b.add_vertices(3);
    b.set_children(v[0], v[1], v[2]);
    return b.build();
}

// balanced binary tree over n leaves, leaves created first so that leaf ids
// are 0..n-1 in token order
inline ExnetGraph balanced_tree(std::size_t n) {
    GraphBuilder b;
    std::vector<VertexId> leaves = b.add_vertices(n);
    auto build = [&](auto&& self, std::span<const VertexId> range) -> VertexId {
        if (range.size() == 1) return range[0];
        const VertexId v = b.add_vertex();
        const std::size_t half = (range.size() + 1) / 2;
        b.set_left_child(v, self(self, range.first(half)));
        b.set_right_child(v, self(self, range.subspan(half)));
        return v;
    };
    build(build, leaves);
    b.set_leaf_order(leaves);
    return b.build();
}

// Classic multi-parent shape: root R with children (M1, M2); M1 = (J, La),
// M2 = (J, Lb); J = (L1, L2). J has two parents.
struct Diamond {
    ExnetGraph graph;
    VertexId root, m1, m2, join;
};

inline Diamond diamond_dag() {
    GraphBuilder b;
    const VertexId root = b.add_vertex();
    const VertexId m1 = b.add_vertex();
    const VertexId m2 = b.add_vertex();
    const VertexId join = b.add_vertex();
    const VertexId la = b.add_vertex();
    const VertexId lb = b.add_vertex();
    const VertexId l1 = b.add_vertex();
    const VertexId l2 = b.add_vertex();
    b.set_children(root, m1, m2);
    b.set_children(m1, join, la);
    b.set_children(m2, join, lb);
    b.set_children(join, l1, l2);
    b.set_leaf_order({la, l1, l2, lb});
    return {b.build(), root, m1, m2, join};
}

// Random single-rooted DAG: vertex 0 is the root, every other vertex gets
// 1..3 parents among lower ids. Acyclic by construction.
inline RawDag random_raw_dag(std::size_t n, std::uint64_t seed) {
    RawDag d;
    d.add_vertices(n);
    Rng rng(seed);
    for (VertexId v = 1; v < n; ++v) {
        const std::size_t k = 1 + rng.next_index(3);
        for (std::size_t i = 0; i < k; ++i)
            d.add_arc(static_cast<VertexId>(rng.next_index(v)), v);
    }
    return d;
}

inline std::size_t position_of(const std::vector<VertexId>& order, VertexId v) {
    return static_cast<std::size_t>(
        std::find(order.begin(), order.end(), v) - order.begin());
}

}  // namespace exnet::testutil

#endif
