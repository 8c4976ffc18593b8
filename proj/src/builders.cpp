#include "exnet/builders.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace exnet {

namespace {

// Sharing groups are collected against (parent, slot) arc references while
// the graph is still under construction; ArcIds only exist after build().
struct PendingScheme {
    std::map<std::string, std::vector<VertexId>> vertex_groups;
    std::map<std::string, std::vector<std::pair<VertexId, int>>> arc_groups;

    void add_vertex(const std::string& name, VertexId v) {
        vertex_groups[name].push_back(v);
    }
    void add_arc(const std::string& name, VertexId parent, int slot) {
        arc_groups[name].push_back({parent, slot});
    }

    // Vertex groups become one primary and one trainer group; arc groups one
    // complementary group. Arcs into leaves carry no parameters and are
    // dropped, as are groups that end up empty or singleton-free.
    ShareScheme materialise(const ExnetGraph& g) const {
        ShareScheme scheme;
        for (const auto& [name, members] : vertex_groups) {
            std::vector<std::uint32_t> internal;
            for (VertexId v : members)
                if (g.is_internal(v)) internal.push_back(v);
            if (internal.empty()) continue;
            scheme.groups.push_back({name + "/pp", Role::primary, internal});
            scheme.groups.push_back({name + "/tr", Role::trainer, internal});
        }
        for (const auto& [name, members] : arc_groups) {
            std::vector<std::uint32_t> arcs;
            for (const auto& [parent, slot] : members) {
                const ArcId a = slot == 0 ? g.left_arc(parent) : g.right_arc(parent);
                if (a == kNoArc) throw std::logic_error("sharing: arc reference unset");
                if (g.is_internal(g.arc(a).dst)) arcs.push_back(a);
            }
            if (arcs.empty()) continue;
            scheme.groups.push_back({name + "/cp", Role::complementary, arcs});
        }
        return scheme;
    }
};

struct TreeVertex {
    VertexId id;
    std::uint32_t depth;
    std::uint32_t pos;  // creation index within the tree, root = 0
};

struct TreeArc {
    VertexId parent;
    int slot;
    VertexId dst;
    std::uint32_t dst_depth;
    std::uint32_t pos;
};

struct BuiltTree {
    VertexId root = kNoVertex;
    std::vector<TreeVertex> internals;  // created vertices only, leaves excluded
    std::vector<TreeArc> arcs;
};

// Balanced binary tree over `leaves` (left-biased ceil/floor split). When
// `root` is given it becomes the tree root; a single leaf under a given root
// fills both child slots with it.
BuiltTree build_balanced(GraphBuilder& b, std::span<const VertexId> leaves,
                         std::optional<VertexId> root = std::nullopt) {
    if (leaves.empty()) throw std::invalid_argument("balanced tree needs leaves");
    BuiltTree tree;
    std::uint32_t vpos = 0, apos = 0;

    auto rec = [&](auto&& self, std::span<const VertexId> range,
                   std::uint32_t depth) -> VertexId {
        if (range.size() == 1 && !(depth == 0 && root)) return range[0];
        VertexId v;
        if (depth == 0 && root) {
            v = *root;
        } else {
            v = b.add_vertex();
        }
        tree.internals.push_back({v, depth, vpos++});
        if (range.size() == 1) {
            b.set_children(v, range[0], range[0]);
            tree.arcs.push_back({v, 0, range[0], depth + 1, apos++});
            tree.arcs.push_back({v, 1, range[0], depth + 1, apos++});
            return v;
        }
        const std::size_t half = (range.size() + 1) / 2;
        const VertexId left = self(self, range.first(half), depth + 1);
        b.set_left_child(v, left);
        tree.arcs.push_back({v, 0, left, depth + 1, apos++});
        const VertexId right = self(self, range.subspan(half), depth + 1);
        b.set_right_child(v, right);
        tree.arcs.push_back({v, 1, right, depth + 1, apos++});
        return v;
    };
    tree.root = rec(rec, leaves, 0);
    return tree;
}

// attention-style: all vertices at one depth share, all arcs into one depth
// share
void add_depth_sharing(PendingScheme& scheme, const std::string& prefix,
                       const BuiltTree& tree) {
    for (const auto& v : tree.internals)
        scheme.add_vertex(prefix + "/d" + std::to_string(v.depth), v.id);
    for (const auto& a : tree.arcs)
        scheme.add_arc(prefix + "/d" + std::to_string(a.dst_depth) + "/in", a.parent,
                       a.slot);
}

// sequence/image-style: left children at one depth share their vertex
// networks together with their incoming arcs, likewise right children
void add_leftright_sharing(PendingScheme& scheme, const std::string& prefix,
                           const BuiltTree& tree) {
    for (const auto& a : tree.arcs) {
        const std::string name = prefix + "/d" + std::to_string(a.dst_depth) +
                                 (a.slot == 0 ? "/left" : "/right");
        scheme.add_vertex(name, a.dst);
        scheme.add_arc(name, a.parent, a.slot);
    }
}

void add_position_sharing(PendingScheme& scheme, const std::string& prefix,
                          const BuiltTree& tree) {
    for (const auto& v : tree.internals)
        scheme.add_vertex(prefix + "/p" + std::to_string(v.pos), v.id);
    for (const auto& a : tree.arcs)
        scheme.add_arc(prefix + "/a" + std::to_string(a.pos), a.parent, a.slot);
}

}  // namespace

BuilderOutput build_sequence_tree(std::uint32_t n, bool share_by_depth) {
    if (n < 2) throw std::invalid_argument("build_sequence_tree: need n >= 2");
    GraphBuilder b;
    const std::vector<VertexId> leaves = b.add_vertices(n);
    const BuiltTree tree = build_balanced(b, leaves);
    b.set_leaf_order(leaves);

    BuilderOutput out;
    out.slot_count = n;
    for (std::uint32_t i = 0; i < n; ++i) out.leaf_binding.push_back(i);

    PendingScheme pending;
    if (share_by_depth) add_leftright_sharing(pending, "seq", tree);
    out.graph = b.build();
    out.sharing = pending.materialise(out.graph);
    return out;
}

BuilderOutput build_image_exnet(std::uint32_t n, double overlap) {
    if (n < 1) throw std::invalid_argument("build_image_exnet: need n >= 1");
    if (!(overlap >= 0.5 && overlap < 1.0))
        throw std::invalid_argument("build_image_exnet: overlap must be in [1/2, 1)");

    GraphBuilder b;
    BuilderOutput out;
    out.slot_count = n * n;
    PendingScheme pending;
    std::vector<Region> regions;
    std::vector<VertexId> leaves;
    std::vector<std::optional<std::uint32_t>> binding;

    // class A splits horizontally, class B vertically; depth fixes the class
    auto rec = [&](auto&& self, const Region& r, bool horizontal,
                   std::uint32_t depth) -> VertexId {
        const VertexId v = b.add_vertex();
        if (regions.size() <= v) regions.resize(v + 1);
        regions[v] = r;

        const bool leaf = (r.h_prime - r.h < 1.0) && (r.v_prime - r.v < 1.0);
        if (leaf) {
            leaves.push_back(v);
            const double ih = std::ceil(r.h);
            const double iv = std::ceil(r.v);
            const bool has_pixel = ih <= r.h_prime && iv <= r.v_prime && ih >= 1.0 &&
                                   iv >= 1.0 && ih <= n && iv <= n;
            if (has_pixel) {
                binding.push_back(static_cast<std::uint32_t>(
                    (ih - 1.0) * static_cast<double>(n) + (iv - 1.0)));
            } else {
                binding.push_back(std::nullopt);
            }
            return v;
        }

        Region left = r, right = r;
        if (horizontal) {
            left.h_prime = r.h + overlap * (r.h_prime - r.h);
            right.h = r.h_prime - overlap * (r.h_prime - r.h);
        } else {
            left.v_prime = r.v + overlap * (r.v_prime - r.v);
            right.v = r.v_prime - overlap * (r.v_prime - r.v);
        }
        const VertexId lc = self(self, left, !horizontal, depth + 1);
        b.set_left_child(v, lc);
        const VertexId rc = self(self, right, !horizontal, depth + 1);
        b.set_right_child(v, rc);

        const std::string d = std::to_string(depth + 1);
        pending.add_vertex("img/d" + d + "/left", lc);
        pending.add_vertex("img/d" + d + "/right", rc);
        pending.add_arc("img/d" + d + "/left", v, 0);
        pending.add_arc("img/d" + d + "/right", v, 1);
        return v;
    };
    rec(rec, Region{1.0, static_cast<double>(n), 1.0, static_cast<double>(n)}, true, 0);

    b.set_leaf_order(leaves);
    out.graph = b.build();
    out.sharing = pending.materialise(out.graph);
    out.leaf_binding = std::move(binding);
    regions.resize(out.graph.capacity());
    out.regions = std::move(regions);
    return out;
}

BuilderOutput build_multilayer(const std::vector<std::uint32_t>& layer_sizes) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("build_multilayer: need at least two layers");
    for (std::uint32_t s : layer_sizes)
        if (s == 0) throw std::invalid_argument("build_multilayer: layer sizes must be >= 1");
    if (layer_sizes.back() != 1)
        throw std::invalid_argument("build_multilayer: last layer must have size 1");

    GraphBuilder b;
    std::vector<VertexId> prev = b.add_vertices(layer_sizes[0]);
    const std::vector<VertexId> leaves = prev;
    for (std::size_t i = 1; i < layer_sizes.size(); ++i) {
        const std::vector<VertexId> layer = b.add_vertices(layer_sizes[i]);
        for (VertexId v : layer) build_balanced(b, prev, v);
        prev = layer;
    }
    b.set_leaf_order(leaves);

    BuilderOutput out;
    out.slot_count = layer_sizes[0];
    for (std::uint32_t i = 0; i < layer_sizes[0]; ++i) out.leaf_binding.push_back(i);
    out.graph = b.build();
    return out;
}

BuilderOutput build_attention(const AttentionParams& params) {
    const std::uint32_t n = params.n;
    if (n < 2) throw std::invalid_argument("build_attention: need n >= 2");
    if (params.layers < 2) throw std::invalid_argument("build_attention: need layers >= 2");
    if (params.heads < 1) throw std::invalid_argument("build_attention: need heads >= 1");

    GraphBuilder b;
    PendingScheme pending;
    const std::vector<VertexId> leaves = b.add_vertices(n);
    std::vector<VertexId> q = leaves;  // q(1, j) are the leaves

    for (std::uint32_t layer = 0; layer + 1 < params.layers; ++layer) {
        const std::string lp = "att/L" + std::to_string(layer);

        // optional instance mixing: q'(i,j) = (q(i,j), leaf j)
        std::vector<VertexId> qp(n);
        if (params.mix_instance) {
            for (std::uint32_t j = 0; j < n; ++j) {
                qp[j] = b.add_vertex();
                b.set_children(qp[j], q[j], leaves[j]);
                pending.add_vertex(lp + "/qprime", qp[j]);
                pending.add_arc(lp + "/qprime/left", qp[j], 0);
                pending.add_arc(lp + "/qprime/right", qp[j], 1);
            }
        } else {
            qp = q;
        }

        // all ordered pairs s(i,j,k) = (q'(i,j), q'(i,k))
        std::vector<std::vector<VertexId>> s(n, std::vector<VertexId>(n));
        for (std::uint32_t j = 0; j < n; ++j) {
            for (std::uint32_t k = 0; k < n; ++k) {
                s[j][k] = b.add_vertex();
                b.set_children(s[j][k], qp[j], qp[k]);
                pending.add_vertex(lp + "/s", s[j][k]);
                pending.add_arc(lp + "/s/left", s[j][k], 0);
                pending.add_arc(lp + "/s/right", s[j][k], 1);
            }
        }

        // per position: one balanced tree per head over s(i,j,*), then a
        // head-merge tree rooted at q(i+1,j)
        std::vector<VertexId> q_next(n);
        for (std::uint32_t j = 0; j < n; ++j) {
            q_next[j] = b.add_vertex();
            if (params.heads == 1) {
                const BuiltTree tree = build_balanced(b, s[j], q_next[j]);
                add_depth_sharing(pending, lp + "/head0", tree);
            } else {
                std::vector<VertexId> head_roots;
                for (std::uint32_t h = 0; h < params.heads; ++h) {
                    const BuiltTree tree = build_balanced(b, s[j]);
                    add_depth_sharing(pending, lp + "/head" + std::to_string(h), tree);
                    head_roots.push_back(tree.root);
                }
                const BuiltTree merge = build_balanced(b, head_roots, q_next[j]);
                add_position_sharing(pending, lp + "/merge", merge);
            }
        }
        q = std::move(q_next);
    }

    // final reduction over the last layer
    const BuiltTree final_tree = build_balanced(b, q);
    add_depth_sharing(pending, "att/final", final_tree);

    b.set_leaf_order(leaves);
    BuilderOutput out;
    out.slot_count = n;
    for (std::uint32_t i = 0; i < n; ++i) out.leaf_binding.push_back(i);
    out.graph = b.build();
    out.sharing = pending.materialise(out.graph);
    return out;
}

BuilderOutput apply_supernodes(const BuilderOutput& base, std::uint32_t width) {
    if (width < 1) throw std::invalid_argument("apply_supernodes: width must be >= 1");
    const ExnetGraph& bg = base.graph;
    const auto report = validate_exnet(bg);
    if (!report.valid()) throw std::invalid_argument("apply_supernodes: base graph invalid");

    GraphBuilder b;
    std::vector<std::vector<VertexId>> members(bg.capacity());

    // leaf members first, in base leaf order, so they occupy the low ids
    std::vector<VertexId> new_leaves;
    std::vector<std::optional<std::uint32_t>> binding;
    for (std::size_t i = 0; i < bg.leaves().size(); ++i) {
        const VertexId leaf = bg.leaves()[i];
        members[leaf] = b.add_vertices(width);
        for (VertexId m : members[leaf]) {
            new_leaves.push_back(m);
            binding.push_back(base.leaf_binding[i]);
        }
    }
    for (VertexId v : bg.vertices())
        if (bg.is_internal(v)) members[v] = b.add_vertices(width);

    // every member of an internal supernode roots its own tree over the
    // 2*width members of the two child supernodes
    for (VertexId v : bg.vertices()) {
        if (bg.is_leaf(v)) continue;
        std::vector<VertexId> tree_leaves = members[bg.left_child(v)];
        const auto& right = members[bg.right_child(v)];
        tree_leaves.insert(tree_leaves.end(), right.begin(), right.end());
        for (VertexId m : members[v]) build_balanced(b, tree_leaves, m);
    }

    if (width > 1) build_balanced(b, members[bg.root()]);
    b.set_leaf_order(new_leaves);

    BuilderOutput out;
    out.slot_count = base.slot_count;
    out.leaf_binding = std::move(binding);
    out.graph = b.build();
    return out;
}

}  // namespace exnet
