#include "exnet/graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace exnet {

VertexId ExnetGraph::sibling_of_arc(ArcId a) const {
    const VertexId src = arcs_[a].src;
    const auto& slots = child_arcs_[src];
    return a == slots[0] ? arcs_[slots[1]].dst : arcs_[slots[0]].dst;
}

std::size_t ExnetGraph::leaf_index(VertexId leaf) const {
    if (leaf >= leaf_pos_.size() || leaf_pos_[leaf] == kNoVertex)
        throw std::invalid_argument("leaf_index: not a leaf");
    return leaf_pos_[leaf];
}

VertexId GraphBuilder::add_vertex() {
    slots_.push_back({});
    alive_.push_back(true);
    return static_cast<VertexId>(slots_.size() - 1);
}

std::vector<VertexId> GraphBuilder::add_vertices(std::size_t n) {
    std::vector<VertexId> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(add_vertex());
    return ids;
}

void GraphBuilder::set_left_child(VertexId parent, VertexId child) {
    if (parent >= slots_.size() || child >= slots_.size())
        throw std::invalid_argument("set_left_child: unknown vertex");
    slots_[parent][0].child = child;
}

void GraphBuilder::set_right_child(VertexId parent, VertexId child) {
    if (parent >= slots_.size() || child >= slots_.size())
        throw std::invalid_argument("set_right_child: unknown vertex");
    slots_[parent][1].child = child;
}

void GraphBuilder::set_children(VertexId parent, VertexId left, VertexId right) {
    set_left_child(parent, left);
    set_right_child(parent, right);
}

void GraphBuilder::remove_vertex(VertexId v) {
    if (v >= slots_.size()) throw std::invalid_argument("remove_vertex: unknown vertex");
    alive_[v] = false;
    slots_[v] = {};
}

void GraphBuilder::set_leaf_order(std::vector<VertexId> leaves) {
    leaf_order_ = std::move(leaves);
}

ExnetGraph GraphBuilder::build() const {
    const std::size_t n = slots_.size();
    ExnetGraph g;
    g.alive_ = alive_;
    g.child_arcs_.assign(n, {kNoArc, kNoArc});
    g.parent_arcs_.assign(n, {});
    g.leaf_pos_.assign(n, kNoVertex);

    for (VertexId v = 0; v < n; ++v) {
        if (!alive_[v]) {
            if (slots_[v][0].child != kNoVertex || slots_[v][1].child != kNoVertex)
                throw std::logic_error("build: removed vertex still has children");
            continue;
        }
        g.vertex_list_.push_back(v);
        for (int s = 0; s < 2; ++s) {
            const VertexId c = slots_[v][s].child;
            if (c == kNoVertex) continue;
            if (!alive_[c]) throw std::logic_error("build: child slot references removed vertex");
            const ArcId a = static_cast<ArcId>(g.arcs_.size());
            g.arcs_.push_back({v, c});
            g.child_arcs_[v][s] = a;
            g.parent_arcs_[c].push_back(a);
        }
    }
    g.vertex_count_ = g.vertex_list_.size();

    g.root_ = kNoVertex;
    for (VertexId v : g.vertex_list_) {
        if (g.parent_arcs_[v].empty()) {
            g.root_ = v;
            break;
        }
    }

    if (!leaf_order_.empty()) {
        g.leaves_ = leaf_order_;
    } else {
        for (VertexId v : g.vertex_list_)
            if (g.child_arcs_[v][0] == kNoArc && g.child_arcs_[v][1] == kNoArc)
                g.leaves_.push_back(v);
    }
    for (std::size_t i = 0; i < g.leaves_.size(); ++i) {
        const VertexId leaf = g.leaves_[i];
        if (leaf >= n || !g.alive_[leaf])
            throw std::logic_error("build: leaf order references unknown vertex");
        g.leaf_pos_[leaf] = static_cast<std::uint32_t>(i);
    }
    return g;
}

VertexId RawDag::add_vertex() {
    children_.push_back({});
    parent_count_.push_back(0);
    return static_cast<VertexId>(children_.size() - 1);
}

std::vector<VertexId> RawDag::add_vertices(std::size_t n) {
    std::vector<VertexId> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ids.push_back(add_vertex());
    return ids;
}

void RawDag::add_arc(VertexId src, VertexId dst) {
    if (src >= children_.size() || dst >= children_.size())
        throw std::invalid_argument("add_arc: unknown vertex");
    children_[src].push_back(dst);
    ++parent_count_[dst];
}

ValidationReport validate_exnet(const ExnetGraph& g) {
    ValidationReport report;
    auto vtag = [](VertexId v) { return "v" + std::to_string(v); };
    auto atag = [](ArcId a) { return "a" + std::to_string(a); };

    // single root
    std::vector<VertexId> roots;
    for (VertexId v : g.vertices())
        if (g.parent_arcs(v).empty()) roots.push_back(v);
    if (roots.size() != 1) {
        for (VertexId v : roots) report.violations.push_back({"single-root", vtag(v)});
        if (roots.empty()) report.violations.push_back({"single-root", "none"});
    } else if (roots[0] != g.root()) {
        report.violations.push_back({"single-root", vtag(roots[0])});
    }

    // binary children: 0 or 2 filled slots
    for (VertexId v : g.vertices()) {
        const bool l = g.left_arc(v) != kNoArc;
        const bool r = g.right_arc(v) != kNoArc;
        if (l != r) report.violations.push_back({"binary-children", vtag(v)});
    }

    // parent/child consistency
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        const Arc& arc = g.arc(a);
        if (!g.is_vertex(arc.src) || !g.is_vertex(arc.dst)) {
            report.violations.push_back({"arc-endpoints", atag(a)});
            continue;
        }
        const auto parents = g.parent_arcs(arc.dst);
        if (std::find(parents.begin(), parents.end(), a) == parents.end())
            report.violations.push_back({"parent-child", atag(a)});
        if (g.left_arc(arc.src) != a && g.right_arc(arc.src) != a)
            report.violations.push_back({"parent-child", atag(a)});
    }

    // acyclicity via Kahn over child arcs
    std::vector<std::uint32_t> pending(g.capacity(), 0);
    std::deque<VertexId> ready;
    for (VertexId v : g.vertices()) {
        pending[v] = static_cast<std::uint32_t>(g.parent_arcs(v).size());
        if (pending[v] == 0) ready.push_back(v);
    }
    std::size_t emitted = 0;
    while (!ready.empty()) {
        const VertexId v = ready.front();
        ready.pop_front();
        ++emitted;
        for (int s = 0; s < 2; ++s) {
            const ArcId a = s == 0 ? g.left_arc(v) : g.right_arc(v);
            if (a == kNoArc) continue;
            const VertexId c = g.arc(a).dst;
            if (--pending[c] == 0) ready.push_back(c);
        }
    }
    if (emitted != g.vertex_count()) report.violations.push_back({"acyclic", "cycle"});

    // declared leaf order covers exactly the childless vertices
    std::size_t childless = 0;
    for (VertexId v : g.vertices())
        if (g.is_leaf(v)) ++childless;
    if (childless != g.leaves().size()) report.violations.push_back({"leaf-set", "order"});
    for (VertexId leaf : g.leaves())
        if (!g.is_vertex(leaf) || !g.is_leaf(leaf))
            report.violations.push_back({"leaf-set", vtag(leaf)});

    return report;
}

VertexId sibling(const ExnetGraph& g, VertexId z, VertexId v) {
    if (!g.is_vertex(z) || g.is_leaf(z))
        throw std::invalid_argument("sibling: z has no children");
    if (g.left_child(z) == v) return g.right_child(z);
    if (g.right_child(z) == v) return g.left_child(z);
    throw std::invalid_argument("sibling: v is not a child of z");
}

namespace {

// Balanced binary split of an ordered child list under `parent`, creating
// fresh intermediate vertices for groups of two or more.
void attach_balanced(GraphBuilder& b, VertexId parent,
                     std::span<const VertexId> kids) {
    auto group_vertex = [&](std::span<const VertexId> group,
                            auto&& self) -> VertexId {
        if (group.size() == 1) return group[0];
        const VertexId v = b.add_vertex();
        const std::size_t half = (group.size() + 1) / 2;
        b.set_left_child(v, self(group.first(half), self));
        b.set_right_child(v, self(group.subspan(half), self));
        return v;
    };
    const std::size_t half = (kids.size() + 1) / 2;
    b.set_left_child(parent, group_vertex(kids.first(half), group_vertex));
    b.set_right_child(parent, group_vertex(kids.subspan(half), group_vertex));
}

}  // namespace

ExnetGraph normalize_dag(const RawDag& raw) {
    const std::size_t n = raw.vertex_count();
    if (n == 0) throw std::invalid_argument("normalize_dag: empty graph");

    // mutable copy
    std::vector<std::vector<VertexId>> children(n);
    std::vector<std::vector<VertexId>> parents(n);
    for (VertexId v = 0; v < n; ++v) {
        children[v] = raw.children(v);
        for (VertexId c : children[v]) parents[c].push_back(v);
    }

    VertexId root = kNoVertex;
    std::size_t root_count = 0;
    for (VertexId v = 0; v < n; ++v) {
        if (parents[v].empty()) {
            root = v;
            ++root_count;
        }
    }
    if (root_count != 1) throw std::invalid_argument("normalize_dag: input must have exactly one root");

    // cycle check (Kahn over the raw arcs)
    {
        std::vector<std::size_t> indeg(n);
        std::deque<VertexId> q;
        for (VertexId v = 0; v < n; ++v) {
            indeg[v] = parents[v].size();
            if (indeg[v] == 0) q.push_back(v);
        }
        std::size_t seen = 0;
        while (!q.empty()) {
            const VertexId v = q.front();
            q.pop_front();
            ++seen;
            for (VertexId c : children[v])
                if (--indeg[c] == 0) q.push_back(c);
        }
        if (seen != n) throw std::invalid_argument("normalize_dag: input has a cycle");
    }

    // splice out every vertex with exactly one child: its parents adopt the
    // child in place; a unary root hands the root role to its child
    std::vector<bool> alive(n, true);
    bool changed = true;
    while (changed) {
        changed = false;
        for (VertexId v = 0; v < n; ++v) {
            if (!alive[v] || children[v].size() != 1) continue;
            const VertexId child = children[v][0];
            for (VertexId p : parents[v]) {
                for (VertexId& c : children[p])
                    if (c == v) c = child;
                parents[child].push_back(p);
            }
            std::erase(parents[child], v);
            if (v == root) root = child;
            alive[v] = false;
            children[v].clear();
            parents[v].clear();
            changed = true;
        }
    }

    GraphBuilder b;
    b.add_vertices(n);
    for (VertexId v = 0; v < n; ++v)
        if (!alive[v]) b.remove_vertex(v);
    for (VertexId v = 0; v < n; ++v) {
        if (!alive[v] || children[v].empty()) continue;
        if (children[v].size() == 2) {
            b.set_children(v, children[v][0], children[v][1]);
        } else {
            attach_balanced(b, v, children[v]);
        }
    }
    return b.build();
}

std::vector<VertexId> up_order(const ExnetGraph& g) {
    std::vector<std::uint32_t> pending(g.capacity(), 0);
    std::deque<VertexId> ready;
    std::vector<VertexId> order;
    order.reserve(g.vertex_count());

    for (VertexId v : g.vertices())
        if (g.is_internal(v)) pending[v] = 2;
    for (VertexId leaf : g.leaves()) ready.push_back(leaf);

    while (!ready.empty()) {
        const VertexId v = ready.front();
        ready.pop_front();
        order.push_back(v);
        for (ArcId a : g.parent_arcs(v)) {
            const VertexId z = g.arc(a).src;
            if (--pending[z] == 0) ready.push_back(z);
        }
    }
    if (order.size() != g.vertex_count())
        throw std::invalid_argument("up_order: graph is not a valid exnet");
    return order;
}

std::vector<VertexId> down_order(const ExnetGraph& g) {
    std::vector<std::uint32_t> pending(g.capacity(), 0);
    std::deque<VertexId> ready;
    std::vector<VertexId> order;
    order.reserve(g.internal_count());

    for (VertexId v : g.vertices())
        pending[v] = static_cast<std::uint32_t>(g.parent_arcs(v).size());
    if (g.is_internal(g.root())) ready.push_back(g.root());

    while (!ready.empty()) {
        const VertexId v = ready.front();
        ready.pop_front();
        order.push_back(v);
        for (int s = 0; s < 2; ++s) {
            const ArcId a = s == 0 ? g.left_arc(v) : g.right_arc(v);
            if (a == kNoArc) continue;
            const VertexId c = g.arc(a).dst;
            if (--pending[c] == 0 && g.is_internal(c)) ready.push_back(c);
        }
    }
    if (order.size() != g.internal_count())
        throw std::invalid_argument("down_order: graph is not a valid exnet");
    return order;
}

std::string to_dot(const ExnetGraph& g) {
    // depth = shortest arc distance from the root
    std::vector<std::uint32_t> depth(g.capacity(), 0);
    for (VertexId v : down_order(g)) {
        for (int s = 0; s < 2; ++s) {
            const ArcId a = s == 0 ? g.left_arc(v) : g.right_arc(v);
            if (a == kNoArc) continue;
            const VertexId c = g.arc(a).dst;
            const std::uint32_t d = depth[v] + 1;
            if (depth[c] == 0 || d < depth[c]) depth[c] = d;
        }
    }

    std::ostringstream out;
    out << "digraph exnet {\n";
    for (VertexId v : g.vertices()) {
        const char* role = v == g.root() ? "root" : (g.is_leaf(v) ? "leaf" : "internal");
        out << "  v" << v << " [label=\"v" << v << " d" << depth[v] << " " << role << "\"];\n";
    }
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        const Arc& arc = g.arc(a);
        out << "  v" << arc.src << " -> v" << arc.dst << " [label=\"a" << a << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace exnet
