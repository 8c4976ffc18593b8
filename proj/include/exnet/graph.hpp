#ifndef EXNET_GRAPH_HPP
#define EXNET_GRAPH_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace exnet {

using VertexId = std::uint32_t;
using ArcId = std::uint32_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
inline constexpr ArcId kNoArc = std::numeric_limits<ArcId>::max();

struct Arc {
    VertexId src = kNoVertex;
    VertexId dst = kNoVertex;
};

struct Violation {
    std::string rule;     // e.g. "single-root", "binary-children"
    std::string subject;  // offending vertex/arc, e.g. "v3" or "a7"
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
};

// Extraction-network graph: single-rooted DAG whose internal vertices have
// exactly two ordered child slots (left, right). The two slots may reference
// the same vertex; they still own distinct arcs. Immutable after build.
class ExnetGraph {
public:
    std::uint32_t capacity() const { return static_cast<std::uint32_t>(alive_.size()); }
    bool is_vertex(VertexId v) const { return v < alive_.size() && alive_[v]; }
    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t arc_count() const { return arcs_.size(); }
    std::size_t internal_count() const { return vertex_count_ - leaves_.size(); }

    bool is_leaf(VertexId v) const { return child_arcs_[v][0] == kNoArc && child_arcs_[v][1] == kNoArc; }
    bool is_internal(VertexId v) const { return !is_leaf(v); }

    VertexId root() const { return root_; }
    const std::vector<VertexId>& leaves() const { return leaves_; }

    // Alive vertex ids in ascending order.
    const std::vector<VertexId>& vertices() const { return vertex_list_; }

    ArcId left_arc(VertexId v) const { return child_arcs_[v][0]; }
    ArcId right_arc(VertexId v) const { return child_arcs_[v][1]; }
    VertexId left_child(VertexId v) const { return arcs_[child_arcs_[v][0]].dst; }
    VertexId right_child(VertexId v) const { return arcs_[child_arcs_[v][1]].dst; }

    const Arc& arc(ArcId a) const { return arcs_[a]; }
    std::span<const ArcId> parent_arcs(VertexId v) const { return parent_arcs_[v]; }

    // Sibling with respect to the given arc: the vertex in the other child
    // slot of arc.src. Well defined even when both slots hold the same vertex.
    VertexId sibling_of_arc(ArcId a) const;

    // Position of a leaf in the token order.
    std::size_t leaf_index(VertexId leaf) const;

    friend class GraphBuilder;

private:
    std::vector<bool> alive_;
    std::vector<std::array<ArcId, 2>> child_arcs_;  // kNoArc for empty slots
    std::vector<Arc> arcs_;
    std::vector<std::vector<ArcId>> parent_arcs_;
    std::vector<VertexId> vertex_list_;
    std::vector<VertexId> leaves_;
    std::vector<std::uint32_t> leaf_pos_;
    VertexId root_ = kNoVertex;
    std::size_t vertex_count_ = 0;
};

// Mutable staging area for ExnetGraph construction. Vertices get dense ids in
// creation order; arcs are materialised at build() in ascending (vertex, slot)
// order so ArcIds are stable cache keys.
class GraphBuilder {
public:
    VertexId add_vertex();
    std::vector<VertexId> add_vertices(std::size_t n);

    void set_left_child(VertexId parent, VertexId child);
    void set_right_child(VertexId parent, VertexId child);
    void set_children(VertexId parent, VertexId left, VertexId right);

    // Tombstones a vertex (used by normalisation). It must not be referenced
    // by any child slot at build time.
    void remove_vertex(VertexId v);

    // Overrides the default leaf order (ascending id).
    void set_leaf_order(std::vector<VertexId> leaves);

    // Assembles the graph. Root = first alive vertex without parents (or
    // kNoVertex when none exists); exnet-level rules are checked by
    // validate_exnet, not here.
    ExnetGraph build() const;

private:
    struct Slot {
        VertexId child = kNoVertex;
    };
    std::vector<std::array<Slot, 2>> slots_;
    std::vector<bool> alive_;
    std::vector<VertexId> leaf_order_;
};

// Arbitrary-arity staging DAG, input of normalize_dag.
class RawDag {
public:
    VertexId add_vertex();
    std::vector<VertexId> add_vertices(std::size_t n);
    void add_arc(VertexId src, VertexId dst);

    std::size_t vertex_count() const { return children_.size(); }
    const std::vector<VertexId>& children(VertexId v) const { return children_[v]; }
    std::size_t parent_count(VertexId v) const { return parent_count_[v]; }

private:
    std::vector<std::vector<VertexId>> children_;
    std::vector<std::size_t> parent_count_;
};

// Reports acyclicity, single-root, binary-children and parent/child
// consistency. Violations are collected, never thrown.
ValidationReport validate_exnet(const ExnetGraph& g);

// rch(z) if v == lch(z), else lch(z). Throws std::invalid_argument when v is
// not a child of z.
VertexId sibling(const ExnetGraph& g, VertexId z, VertexId v);

// Turns a single-rooted DAG into an exnet: vertices with one child are
// spliced out (their parents adopt the child; a spliced root promotes its
// child), vertices with more than two children are split into balanced
// binary sub-trees whose partition sizes differ by at most one, following the
// children's insertion order. Surviving vertices keep their ids; new vertices
// get ids above the input range. Throws on cyclic or multi-root input.
ExnetGraph normalize_dag(const RawDag& raw);

// All vertices, every vertex after both of its children; leaves first.
std::vector<VertexId> up_order(const ExnetGraph& g);

// Internal vertices only, every vertex after all of its parents; root first.
std::vector<VertexId> down_order(const ExnetGraph& g);

// DOT text dump (vertex labels id/depth/role, arc labels ArcId).
std::string to_dot(const ExnetGraph& g);

}  // namespace exnet

#endif
