#ifndef EXNET_BUILDERS_HPP
#define EXNET_BUILDERS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "exnet/bundle.hpp"
#include "exnet/graph.hpp"

namespace exnet {

// Inclusive rectangular image region carried by image-exnet vertices.
struct Region {
    double h = 0.0, h_prime = 0.0;  // horizontal bounds
    double v = 0.0, v_prime = 0.0;  // vertical bounds
};

struct BuilderOutput {
    ExnetGraph graph;
    ShareScheme sharing;
    // per leaf (in leaf order): semantic token slot, or none for a zero token
    std::vector<std::optional<std::uint32_t>> leaf_binding;
    std::uint32_t slot_count = 0;
    // image builder only: region per vertex id
    std::vector<Region> regions;
};

// Balanced binary tree over n ordered sequence slots. With share_by_depth,
// left children at equal depth share vertex and incoming-arc parameters, and
// likewise right children.
BuilderOutput build_sequence_tree(std::uint32_t n, bool share_by_depth);

// Region tree over an n x n image with overlap level 1/2 <= overlap < 1.
// Horizontal and vertical splits alternate from the root; a vertex whose
// region extents both drop below one pixel becomes a leaf bound to the unique
// pixel it contains (or to a zero token when it contains none).
BuilderOutput build_image_exnet(std::uint32_t n, double overlap);

// Layered DAG: every vertex of layer i+1 roots a fresh balanced tree whose
// leaf set is the whole of layer i. First size = leaf count, last must be 1.
BuilderOutput build_multilayer(const std::vector<std::uint32_t>& layer_sizes);

struct AttentionParams {
    std::uint32_t n = 2;       // sequence length (tokens carry positions)
    std::uint32_t layers = 2;  // >= 2
    std::uint32_t heads = 1;
    bool mix_instance = true;
};

// Transformer-style exnet: per layer, pairwise mixing vertices s(i,j,k) over
// all ordered token pairs, reduced per position by one balanced tree per head
// plus a head-merge tree, with the sharing scheme tied to roles and depths.
BuilderOutput build_attention(const AttentionParams& params);

// Replaces every vertex by a supernode of `width` vertices; each member of an
// internal supernode roots its own unshared balanced tree over the 2*width
// child members, and a fresh balanced tree over the root supernode provides
// the new root (skipped for width 1).
BuilderOutput apply_supernodes(const BuilderOutput& base, std::uint32_t width);

}  // namespace exnet

#endif
