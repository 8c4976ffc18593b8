#ifndef EXNET_BUNDLE_HPP
#define EXNET_BUNDLE_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "exnet/graph.hpp"
#include "exnet/mlp.hpp"

namespace exnet {

// The three network roles of the architecture: primary propagators and
// trainers live on internal vertices, complementary propagators on arcs whose
// destination is internal.
enum class Role : std::uint8_t { primary, trainer, complementary };

const char* role_name(Role role);

// One named parameter-sharing group. `members` are vertex ids for
// primary/trainer roles and arc ids for the complementary role.
struct ShareGroup {
    std::string name;
    Role role = Role::primary;
    std::vector<std::uint32_t> members;
};

// A partial partition of the trainable keys; keys not covered get their own
// singleton group.
struct ShareScheme {
    std::vector<ShareGroup> groups;
};

// Extraction/prediction vector sizes plus the shared hidden shape of all
// component networks.
struct ExnetDims {
    std::uint32_t d_p = 8;
    std::uint32_t d_c = 8;
    std::uint32_t output_dim = 1;
    std::vector<std::uint32_t> hidden = {32};
    Activation activation = Activation::tanh;

    MlpSpec primary_spec() const;        // (d_p, d_p) -> d_p
    MlpSpec trainer_spec() const;        // (d_p, d_c) -> output
    MlpSpec complementary_spec() const;  // (d_c, d_p) -> d_c
};

using GroupId = std::uint32_t;
inline constexpr GroupId kNoGroup = 0xffffffffu;

// group id -> summed gradient over the group's members
using GradMap = std::map<GroupId, std::vector<double>>;

// Per-graph parameter store. Every internal vertex owns a primary propagator
// and a trainer parameter vector, every arc with internal destination owns a
// complementary propagator vector; sharing groups alias several keys to one
// underlying vector.
class NetworkBundle {
public:
    struct Group {
        std::string name;
        Role role = Role::primary;
        std::vector<std::uint32_t> members;
        std::vector<double> params;
    };

    NetworkBundle(const ExnetGraph& graph, const ExnetDims& dims,
                  const ShareScheme& scheme, std::uint64_t init_seed);

    const ExnetDims& dims() const { return dims_; }
    const MlpSpec& spec(Role role) const;

    GroupId primary_group(VertexId v) const;
    GroupId trainer_group(VertexId v) const;
    GroupId complementary_group(ArcId a) const;

    std::span<const double> primary_params(VertexId v) const;
    std::span<const double> trainer_params(VertexId v) const;
    std::span<const double> complementary_params(ArcId a) const;

    std::size_t group_count() const { return groups_.size(); }
    const Group& group(GroupId g) const { return groups_[g]; }
    std::span<double> group_params(GroupId g) { return groups_[g].params; }

    bool has_sharing() const;

    // fresh init_params draw for one group (epoch resets)
    void reset_group(GroupId g, std::uint64_t seed);

    // total parameter distance helper for tests
    std::size_t total_param_count() const;

private:
    ExnetDims dims_;
    MlpSpec primary_spec_, trainer_spec_, complementary_spec_;
    std::vector<Group> groups_;
    std::vector<GroupId> pp_group_, tr_group_;  // by vertex id
    std::vector<GroupId> cp_group_;             // by arc id
};

enum class OptKind : std::uint8_t { sgd, adam };

struct OptimizerConfig {
    OptKind kind = OptKind::sgd;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// SGD or Adam over shared-parameter groups. Gradients of one group are
// expected pre-summed over its members (see accumulate_grad).
class Optimizer {
public:
    Optimizer(const OptimizerConfig& config, const NetworkBundle& bundle);

    // One step for every group present in `grads`. Rejects non-finite
    // gradients before touching any parameter.
    void apply_update(NetworkBundle& bundle, const GradMap& grads);

    const OptimizerConfig& config() const { return config_; }

private:
    OptimizerConfig config_;
    std::vector<std::vector<double>> m_, v_;
    std::vector<std::uint64_t> step_;
};

// adds `grad` into the group's slot, creating it zero-initialised on demand
void accumulate_grad(GradMap& grads, GroupId group, std::span<const double> grad);

double grad_norm(const GradMap& grads);

// Versioned binary checkpoint of all groups (layout descriptors + raw
// little-endian doubles); round-trips bit-exactly.
void save_checkpoint(const NetworkBundle& bundle, const std::string& path);

// Loads params into a structurally identical bundle; throws on any layout or
// membership mismatch.
void load_checkpoint(NetworkBundle& bundle, const std::string& path);

}  // namespace exnet

#endif
