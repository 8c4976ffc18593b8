#include "exnet/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "exnet/rng.hpp"

namespace exnet {

const char* role_name(Role role) {
    switch (role) {
        case Role::primary: return "primary";
        case Role::trainer: return "trainer";
        case Role::complementary: return "complementary";
    }
    return "?";
}

MlpSpec ExnetDims::primary_spec() const {
    return {2 * d_p, hidden, d_p, activation};
}

MlpSpec ExnetDims::trainer_spec() const {
    return {d_p + d_c, hidden, output_dim, activation};
}

MlpSpec ExnetDims::complementary_spec() const {
    return {d_c + d_p, hidden, d_c, activation};
}

NetworkBundle::NetworkBundle(const ExnetGraph& graph, const ExnetDims& dims,
                             const ShareScheme& scheme, std::uint64_t init_seed)
    : dims_(dims),
      primary_spec_(dims.primary_spec()),
      trainer_spec_(dims.trainer_spec()),
      complementary_spec_(dims.complementary_spec()) {
    primary_spec_.validate();
    trainer_spec_.validate();
    complementary_spec_.validate();

    pp_group_.assign(graph.capacity(), kNoGroup);
    tr_group_.assign(graph.capacity(), kNoGroup);
    cp_group_.assign(graph.arc_count(), kNoGroup);

    auto key_slot = [&](Role role, std::uint32_t id) -> GroupId& {
        switch (role) {
            case Role::primary:
                if (!graph.is_vertex(id) || graph.is_leaf(id))
                    throw std::invalid_argument("sharing: primary key must be an internal vertex");
                return pp_group_[id];
            case Role::trainer:
                if (!graph.is_vertex(id) || graph.is_leaf(id))
                    throw std::invalid_argument("sharing: trainer key must be an internal vertex");
                return tr_group_[id];
            case Role::complementary:
                if (id >= graph.arc_count() || graph.is_leaf(graph.arc(id).dst))
                    throw std::invalid_argument("sharing: complementary key must be an arc with internal dst");
                return cp_group_[id];
        }
        throw std::invalid_argument("sharing: bad role");
    };

    for (const ShareGroup& sg : scheme.groups) {
        if (sg.members.empty()) throw std::invalid_argument("sharing: empty group " + sg.name);
        const GroupId gid = static_cast<GroupId>(groups_.size());
        for (std::uint32_t id : sg.members) {
            GroupId& slot = key_slot(sg.role, id);
            if (slot != kNoGroup)
                throw std::invalid_argument("sharing: key assigned twice in group " + sg.name);
            slot = gid;
        }
        groups_.push_back({sg.name, sg.role, sg.members, {}});
    }

    // singleton groups for everything not covered by the scheme
    for (VertexId v : graph.vertices()) {
        if (graph.is_leaf(v)) continue;
        if (pp_group_[v] == kNoGroup) {
            pp_group_[v] = static_cast<GroupId>(groups_.size());
            groups_.push_back({"pp/v" + std::to_string(v), Role::primary, {v}, {}});
        }
        if (tr_group_[v] == kNoGroup) {
            tr_group_[v] = static_cast<GroupId>(groups_.size());
            groups_.push_back({"tr/v" + std::to_string(v), Role::trainer, {v}, {}});
        }
    }
    for (ArcId a = 0; a < graph.arc_count(); ++a) {
        if (graph.is_leaf(graph.arc(a).dst)) continue;
        if (cp_group_[a] == kNoGroup) {
            cp_group_[a] = static_cast<GroupId>(groups_.size());
            groups_.push_back({"cp/a" + std::to_string(a), Role::complementary, {a}, {}});
        }
    }

    for (GroupId g = 0; g < groups_.size(); ++g)
        groups_[g].params = init_params(spec(groups_[g].role), mix_seed(init_seed, g));
}

const MlpSpec& NetworkBundle::spec(Role role) const {
    switch (role) {
        case Role::primary: return primary_spec_;
        case Role::trainer: return trainer_spec_;
        case Role::complementary: return complementary_spec_;
    }
    return primary_spec_;
}

GroupId NetworkBundle::primary_group(VertexId v) const {
    const GroupId g = pp_group_[v];
    if (g == kNoGroup) throw std::invalid_argument("no primary propagator at vertex");
    return g;
}

GroupId NetworkBundle::trainer_group(VertexId v) const {
    const GroupId g = tr_group_[v];
    if (g == kNoGroup) throw std::invalid_argument("no trainer at vertex");
    return g;
}

GroupId NetworkBundle::complementary_group(ArcId a) const {
    const GroupId g = cp_group_[a];
    if (g == kNoGroup) throw std::invalid_argument("no complementary propagator at arc");
    return g;
}

std::span<const double> NetworkBundle::primary_params(VertexId v) const {
    return groups_[primary_group(v)].params;
}

std::span<const double> NetworkBundle::trainer_params(VertexId v) const {
    return groups_[trainer_group(v)].params;
}

std::span<const double> NetworkBundle::complementary_params(ArcId a) const {
    return groups_[complementary_group(a)].params;
}

bool NetworkBundle::has_sharing() const {
    for (const Group& g : groups_)
        if (g.members.size() > 1) return true;
    return false;
}

void NetworkBundle::reset_group(GroupId g, std::uint64_t seed) {
    groups_[g].params = init_params(spec(groups_[g].role), seed);
}

std::size_t NetworkBundle::total_param_count() const {
    std::size_t total = 0;
    for (const Group& g : groups_) total += g.params.size();
    return total;
}

Optimizer::Optimizer(const OptimizerConfig& config, const NetworkBundle& bundle)
    : config_(config) {
    if (!std::isfinite(config_.lr))
        throw std::invalid_argument("optimizer: learning rate must be finite");
    if (config_.kind == OptKind::adam) {
        m_.resize(bundle.group_count());
        v_.resize(bundle.group_count());
        step_.assign(bundle.group_count(), 0);
        for (GroupId g = 0; g < bundle.group_count(); ++g) {
            m_[g].assign(bundle.group(g).params.size(), 0.0);
            v_[g].assign(bundle.group(g).params.size(), 0.0);
        }
    }
}

void Optimizer::apply_update(NetworkBundle& bundle, const GradMap& grads) {
    for (const auto& [g, grad] : grads) {
        if (g >= bundle.group_count())
            throw std::invalid_argument("apply_update: unknown group");
        if (grad.size() != bundle.group(g).params.size())
            throw std::invalid_argument("apply_update: gradient length mismatch");
        for (double x : grad)
            if (!std::isfinite(x)) throw std::runtime_error("apply_update: non-finite gradient");
    }

    for (const auto& [g, grad] : grads) {
        auto params = bundle.group_params(g);
        if (config_.kind == OptKind::sgd) {
            for (std::size_t i = 0; i < params.size(); ++i)
                params[i] -= config_.lr * grad[i];
        } else {
            auto& m = m_[g];
            auto& v = v_[g];
            const std::uint64_t t = ++step_[g];
            const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
            const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
                v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
                const double mhat = m[i] / c1;
                const double vhat = v[i] / c2;
                params[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
            }
        }
    }
}

void accumulate_grad(GradMap& grads, GroupId group, std::span<const double> grad) {
    auto [it, inserted] = grads.try_emplace(group);
    if (inserted) {
        it->second.assign(grad.begin(), grad.end());
        return;
    }
    if (it->second.size() != grad.size())
        throw std::invalid_argument("accumulate_grad: length mismatch");
    for (std::size_t i = 0; i < grad.size(); ++i) it->second[i] += grad[i];
}

double grad_norm(const GradMap& grads) {
    double sq = 0.0;
    for (const auto& [g, grad] : grads)
        for (double x : grad) sq += x * x;
    return std::sqrt(sq);
}

namespace {

constexpr char kMagic[8] = {'E', 'X', 'N', 'E', 'T', 'C', 'K', '1'};

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated file");
    return value;
}

void write_spec(std::ostream& out, const MlpSpec& spec) {
    write_pod(out, spec.input_dim);
    write_pod(out, static_cast<std::uint32_t>(spec.hidden_dims.size()));
    for (std::uint32_t h : spec.hidden_dims) write_pod(out, h);
    write_pod(out, spec.output_dim);
    write_pod(out, static_cast<std::uint8_t>(spec.activation));
}

MlpSpec read_spec(std::istream& in) {
    MlpSpec spec;
    spec.input_dim = read_pod<std::uint32_t>(in);
    const std::uint32_t nh = read_pod<std::uint32_t>(in);
    spec.hidden_dims.resize(nh);
    for (std::uint32_t i = 0; i < nh; ++i) spec.hidden_dims[i] = read_pod<std::uint32_t>(in);
    spec.output_dim = read_pod<std::uint32_t>(in);
    spec.activation = static_cast<Activation>(read_pod<std::uint8_t>(in));
    return spec;
}

}  // namespace

void save_checkpoint(const NetworkBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, static_cast<std::uint32_t>(bundle.group_count()));
    for (GroupId g = 0; g < bundle.group_count(); ++g) {
        const auto& group = bundle.group(g);
        write_pod(out, static_cast<std::uint32_t>(group.name.size()));
        out.write(group.name.data(), static_cast<std::streamsize>(group.name.size()));
        write_pod(out, static_cast<std::uint8_t>(group.role));
        write_spec(out, bundle.spec(group.role));
        write_pod(out, static_cast<std::uint32_t>(group.members.size()));
        for (std::uint32_t m : group.members) write_pod(out, m);
        write_pod(out, static_cast<std::uint64_t>(group.params.size()));
        out.write(reinterpret_cast<const char*>(group.params.data()),
                  static_cast<std::streamsize>(group.params.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

void load_checkpoint(NetworkBundle& bundle, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint32_t count = read_pod<std::uint32_t>(in);
    if (count != bundle.group_count())
        throw std::runtime_error("checkpoint: group count mismatch");
    for (GroupId g = 0; g < count; ++g) {
        const auto& group = bundle.group(g);
        const std::uint32_t name_len = read_pod<std::uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const Role role = static_cast<Role>(read_pod<std::uint8_t>(in));
        const MlpSpec spec = read_spec(in);
        const std::uint32_t member_count = read_pod<std::uint32_t>(in);
        std::vector<std::uint32_t> members(member_count);
        for (auto& m : members) m = read_pod<std::uint32_t>(in);
        const std::uint64_t param_count = read_pod<std::uint64_t>(in);
        if (name != group.name || role != group.role || members != group.members ||
            spec != bundle.spec(role) || param_count != group.params.size())
            throw std::runtime_error("checkpoint: layout mismatch at group " + name);
        std::vector<double> params(param_count);
        in.read(reinterpret_cast<char*>(params.data()),
                static_cast<std::streamsize>(param_count * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint: truncated file");
        std::copy(params.begin(), params.end(), bundle.group_params(g).begin());
    }
}

}  // namespace exnet
