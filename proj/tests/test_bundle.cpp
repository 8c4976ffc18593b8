#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "exnet/bundle.hpp"
#include "exnet/rng.hpp"
#include "test_helpers.hpp"

using namespace exnet;
using namespace exnet::testutil;

namespace {

ExnetDims small_dims() {
    ExnetDims dims;
    dims.d_p = 3;
    dims.d_c = 2;
    dims.output_dim = 2;
    dims.hidden = {4};
    return dims;
}

std::vector<double> snapshot(const NetworkBundle& bundle) {
    std::vector<double> all;
    for (GroupId g = 0; g < bundle.group_count(); ++g) {
        const auto& p = bundle.group(g).params;
        all.insert(all.end(), p.begin(), p.end());
    }
    return all;
}

}  // namespace

TEST_CASE("bundle allocates groups for internal vertices and internal-dst arcs") {
    const ExnetGraph g = balanced_tree(4);  // 3 internal, 6 arcs, 2 with internal dst
    const NetworkBundle bundle(g, small_dims(), {}, 1);
    CHECK(bundle.group_count() == 3 + 3 + 2);
    CHECK_FALSE(bundle.has_sharing());
    for (VertexId v : g.vertices()) {
        if (g.is_leaf(v)) {
            CHECK_THROWS_AS(bundle.primary_params(v), std::invalid_argument);
        } else {
            CHECK(bundle.primary_params(v).size() == bundle.spec(Role::primary).param_count());
            CHECK(bundle.trainer_params(v).size() == bundle.spec(Role::trainer).param_count());
        }
    }
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        if (g.is_leaf(g.arc(a).dst))
            CHECK_THROWS_AS(bundle.complementary_params(a), std::invalid_argument);
        else
            CHECK(bundle.complementary_params(a).size() ==
                  bundle.spec(Role::complementary).param_count());
    }
}

TEST_CASE("sharing groups alias one underlying vector") {
    const ExnetGraph g = balanced_tree(4);
    std::vector<std::uint32_t> internal;
    for (VertexId v : g.vertices())
        if (g.is_internal(v) && v != g.root())
            internal.push_back(v);
    REQUIRE(internal.size() == 2);

    ShareScheme scheme;
    scheme.groups.push_back({"pp/shared", Role::primary, internal});
    NetworkBundle bundle(g, small_dims(), scheme, 1);
    CHECK(bundle.has_sharing());
    CHECK(bundle.primary_group(internal[0]) == bundle.primary_group(internal[1]));
    CHECK(bundle.primary_params(internal[0]).data() ==
          bundle.primary_params(internal[1]).data());

    // duplicate assignment is rejected
    ShareScheme bad = scheme;
    bad.groups.push_back({"pp/dup", Role::primary, {internal[0]}});
    CHECK_THROWS_AS(NetworkBundle(g, small_dims(), bad, 1), std::invalid_argument);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    const ExnetGraph g = tiny_tree();
    NetworkBundle bundle(g, small_dims(), {}, 3);
    const auto before = snapshot(bundle);
    Optimizer opt({OptKind::sgd, 0.0}, bundle);
    GradMap grads;
    for (GroupId gid = 0; gid < bundle.group_count(); ++gid)
        grads[gid] = std::vector<double>(bundle.group(gid).params.size(), 0.7);
    opt.apply_update(bundle, grads);
    CHECK(snapshot(bundle) == before);
}

TEST_CASE("sgd applies theta - lr * grad exactly") {
    const ExnetGraph g = tiny_tree();
    NetworkBundle bundle(g, small_dims(), {}, 4);
    const GroupId gid = bundle.primary_group(g.root());
    const std::vector<double> before(bundle.group(gid).params);
    GradMap grads;
    grads[gid] = std::vector<double>(before.size());
    Rng rng(99);
    for (double& x : grads[gid]) x = rng.next_uniform(-1.0, 1.0);

    Optimizer opt({OptKind::sgd, 0.25}, bundle);
    opt.apply_update(bundle, grads);
    const auto after = bundle.group(gid).params;
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(after[i] == before[i] - 0.25 * grads[gid][i]);
}

TEST_CASE("shared groups receive the summed gradient") {
    const ExnetGraph g = balanced_tree(4);
    std::vector<std::uint32_t> internal;
    for (VertexId v : g.vertices())
        if (g.is_internal(v) && v != g.root())
            internal.push_back(v);
    ShareScheme scheme;
    scheme.groups.push_back({"pp/shared", Role::primary, internal});
    NetworkBundle bundle(g, small_dims(), scheme, 5);

    const GroupId gid = bundle.primary_group(internal[0]);
    const std::vector<double> before(bundle.group(gid).params);
    const std::size_t n = before.size();
    std::vector<double> g1(n, 0.5), g2(n, -0.125);

    GradMap grads;
    accumulate_grad(grads, gid, g1);
    accumulate_grad(grads, gid, g2);
    Optimizer opt({OptKind::sgd, 1.0}, bundle);
    opt.apply_update(bundle, grads);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(bundle.group(gid).params[i] == before[i] - (g1[i] + g2[i]));
}

TEST_CASE("sgd with lr then -lr restores parameters bitwise") {
    const ExnetGraph g = tiny_tree();
    NetworkBundle bundle(g, small_dims(), {}, 6);
    const auto before = snapshot(bundle);
    GradMap grads;
    Rng rng(123);
    for (GroupId gid = 0; gid < bundle.group_count(); ++gid) {
        grads[gid] = std::vector<double>(bundle.group(gid).params.size());
        for (double& x : grads[gid]) x = rng.next_uniform(-1.0, 1.0);
    }
    Optimizer fwd({OptKind::sgd, 1e-3}, bundle);
    fwd.apply_update(bundle, grads);
    Optimizer back({OptKind::sgd, -1e-3}, bundle);
    back.apply_update(bundle, grads);
    CHECK(snapshot(bundle) == before);
}

TEST_CASE("adam with zero gradients keeps parameters fixed") {
    const ExnetGraph g = tiny_tree();
    NetworkBundle bundle(g, small_dims(), {}, 7);
    const auto before = snapshot(bundle);
    Optimizer opt({OptKind::adam, 0.01}, bundle);
    GradMap grads;
    for (GroupId gid = 0; gid < bundle.group_count(); ++gid)
        grads[gid] = std::vector<double>(bundle.group(gid).params.size(), 0.0);
    for (int step = 0; step < 3; ++step) opt.apply_update(bundle, grads);
    CHECK(snapshot(bundle) == before);
}

TEST_CASE("non-finite gradients are rejected before any mutation") {
    const ExnetGraph g = tiny_tree();
    NetworkBundle bundle(g, small_dims(), {}, 8);
    const auto before = snapshot(bundle);
    GradMap grads;
    for (GroupId gid = 0; gid < bundle.group_count(); ++gid)
        grads[gid] = std::vector<double>(bundle.group(gid).params.size(), 1.0);
    grads.rbegin()->second.back() = std::nan("");
    Optimizer opt({OptKind::sgd, 0.1}, bundle);
    CHECK_THROWS_AS(opt.apply_update(bundle, grads), std::runtime_error);
    CHECK(snapshot(bundle) == before);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    const ExnetGraph g = balanced_tree(4);
    ShareScheme scheme;
    std::vector<std::uint32_t> internal;
    for (VertexId v : g.vertices())
        if (g.is_internal(v) && v != g.root())
            internal.push_back(v);
    scheme.groups.push_back({"pp/shared", Role::primary, internal});
    NetworkBundle bundle(g, small_dims(), scheme, 9);
    const auto before = snapshot(bundle);

    const auto path =
        (std::filesystem::temp_directory_path() / "exnet_ckpt_test.bin").string();
    save_checkpoint(bundle, path);

    // scramble, then restore from disk
    for (GroupId gid = 0; gid < bundle.group_count(); ++gid)
        for (double& x : bundle.group_params(gid)) x += 1.0;
    CHECK(snapshot(bundle) != before);
    load_checkpoint(bundle, path);
    CHECK(snapshot(bundle) == before);

    // structurally different bundle refuses the file
    NetworkBundle other(g, small_dims(), {}, 9);
    CHECK_THROWS_AS(load_checkpoint(other, path), std::runtime_error);
    std::remove(path.c_str());
}
