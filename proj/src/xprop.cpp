#include "exnet/xprop.hpp"

#include <cmath>
#include <stdexcept>

#include "exnet/rng.hpp"

namespace exnet {

namespace {

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

UpPassResult up_pass(const ExnetGraph& g, const NetworkBundle& nets,
                     const std::vector<std::vector<double>>& tokens) {
    if (tokens.size() != g.leaves().size())
        throw std::invalid_argument("up_pass: token count != leaf count");
    const std::uint32_t d_p = nets.dims().d_p;
    for (const auto& tok : tokens)
        if (tok.size() != d_p) throw std::invalid_argument("up_pass: token dim != d_p");

    UpPassResult result;
    result.primary.alpha.resize(g.capacity());
    for (std::size_t i = 0; i < tokens.size(); ++i)
        result.primary.alpha[g.leaves()[i]] = tokens[i];

    const MlpSpec& pp = nets.spec(Role::primary);
    for (VertexId v : up_order(g)) {
        if (g.is_leaf(v)) continue;
        const auto input = concat(result.primary.alpha[g.left_child(v)],
                                  result.primary.alpha[g.right_child(v)]);
        result.primary.alpha[v] = forward(pp, nets.primary_params(v), input);
    }

    const std::vector<double> zero_beta(nets.dims().d_c, 0.0);
    result.prediction =
        forward(nets.spec(Role::trainer), nets.trainer_params(g.root()),
                concat(result.primary.alpha[g.root()], zero_beta));
    return result;
}

ComplementaryCache down_pass(const ExnetGraph& g, const NetworkBundle& nets,
                             const PrimaryCache& primary, Mode mode,
                             std::uint64_t choice_seed) {
    ComplementaryCache comp;
    comp.vertex_beta.resize(g.capacity());
    comp.arc_beta.resize(g.arc_count());
    comp.sm_choice.assign(g.capacity(), kNoArc);

    const MlpSpec& cp = nets.spec(Role::complementary);
    for (VertexId v : down_order(g)) {
        if (v == g.root()) {
            comp.vertex_beta[v].assign(nets.dims().d_c, 0.0);
            continue;
        }
        const auto parents = g.parent_arcs(v);
        for (ArcId a : parents) {
            const VertexId z = g.arc(a).src;
            const VertexId sib = g.sibling_of_arc(a);
            comp.arc_beta[a] = forward(cp, nets.complementary_params(a),
                                       concat(comp.vertex_beta[z], primary.alpha[sib]));
        }
        if (mode == Mode::stochastic) {
            Rng rng(mix_seed(choice_seed, v));
            const ArcId chosen = parents[rng.next_index(parents.size())];
            comp.sm_choice[v] = chosen;
            comp.vertex_beta[v] = comp.arc_beta[chosen];
        } else {
            comp.vertex_beta[v] = comp.arc_beta[parents[0]];
            for (std::size_t i = 1; i < parents.size(); ++i) {
                const auto& add = comp.arc_beta[parents[i]];
                for (std::size_t j = 0; j < add.size(); ++j)
                    comp.vertex_beta[v][j] += add[j];
            }
        }
    }
    return comp;
}

GradMap compute_gradients(const ExnetGraph& g, const NetworkBundle& nets,
                          const PrimaryCache& primary,
                          const ComplementaryCache& comp, const LossFn& loss,
                          Mode mode) {
    const std::uint32_t d_p = nets.dims().d_p;
    const MlpSpec& tr = nets.spec(Role::trainer);
    const MlpSpec& pp = nets.spec(Role::primary);
    const MlpSpec& cp = nets.spec(Role::complementary);

    GradMap grads;
    for (VertexId v : g.vertices()) {
        if (g.is_leaf(v)) continue;
        if (primary.alpha[v].empty() || comp.vertex_beta[v].empty())
            throw std::invalid_argument("compute_gradients: incomplete caches");

        // trainer term: L(T(theta_T, alpha(v), beta(v)))
        const auto trainer_input = concat(primary.alpha[v], comp.vertex_beta[v]);
        const auto trainer_out = forward(tr, nets.trainer_params(v), trainer_input);
        const auto upstream = loss.grad(trainer_out);
        const auto tr_back = backward(tr, nets.trainer_params(v), trainer_input, upstream);
        accumulate_grad(grads, nets.trainer_group(v), tr_back.param_grad);

        // propagator term: same composition with alpha(v) re-expressed through
        // F; the cached alpha(v) is bit-identical to that re-evaluation, so the
        // trainer backward above already provides the alpha-side input grad
        const std::span<const double> alpha_grad(tr_back.input_grad.data(), d_p);
        const auto pp_input = concat(primary.alpha[g.left_child(v)],
                                     primary.alpha[g.right_child(v)]);
        const auto pp_back = backward(pp, nets.primary_params(v), pp_input, alpha_grad);
        accumulate_grad(grads, nets.primary_group(v), pp_back.param_grad);

        // complementary terms for every parent arc, beta(v) re-expressed per mode
        const auto parents = g.parent_arcs(v);
        if (parents.empty()) continue;
        if (mode == Mode::deterministic) {
            const std::span<const double> beta_grad(tr_back.input_grad.data() + d_p,
                                                    tr_back.input_grad.size() - d_p);
            for (ArcId a : parents) {
                const auto cp_input = concat(comp.vertex_beta[g.arc(a).src],
                                             primary.alpha[g.sibling_of_arc(a)]);
                const auto cp_back =
                    backward(cp, nets.complementary_params(a), cp_input, beta_grad);
                accumulate_grad(grads, nets.complementary_group(a), cp_back.param_grad);
            }
        } else {
            for (ArcId a : parents) {
                // T evaluated at this arc's own extraction; trainer params const
                const auto arc_input = concat(primary.alpha[v], comp.arc_beta[a]);
                const auto arc_out = forward(tr, nets.trainer_params(v), arc_input);
                const auto arc_upstream = loss.grad(arc_out);
                const auto arc_back =
                    backward(tr, nets.trainer_params(v), arc_input, arc_upstream);
                const std::span<const double> beta_grad(
                    arc_back.input_grad.data() + d_p, arc_back.input_grad.size() - d_p);
                const auto cp_input = concat(comp.vertex_beta[g.arc(a).src],
                                             primary.alpha[g.sibling_of_arc(a)]);
                const auto cp_back =
                    backward(cp, nets.complementary_params(a), cp_input, beta_grad);
                accumulate_grad(grads, nets.complementary_group(a), cp_back.param_grad);
            }
        }
    }
    return grads;
}

std::vector<std::vector<double>> local_predictions(const ExnetGraph& g,
                                                   const NetworkBundle& nets,
                                                   const PrimaryCache& primary,
                                                   const ComplementaryCache& comp) {
    std::vector<std::vector<double>> locals(g.capacity());
    const MlpSpec& tr = nets.spec(Role::trainer);
    for (VertexId v : g.vertices()) {
        if (g.is_leaf(v)) continue;
        locals[v] = forward(tr, nets.trainer_params(v),
                            concat(primary.alpha[v], comp.vertex_beta[v]));
    }
    return locals;
}

double local_disagreement(const ExnetGraph& g,
                          const std::vector<std::vector<double>>& locals) {
    const auto& at_root = locals[g.root()];
    double worst = 0.0;
    for (VertexId v : g.vertices()) {
        if (g.is_leaf(v)) continue;
        double sq = 0.0;
        for (std::size_t i = 0; i < at_root.size(); ++i) {
            const double d = locals[v][i] - at_root[i];
            sq += d * d;
        }
        worst = std::max(worst, std::sqrt(sq));
    }
    return worst;
}

TrialResult run_trial(const ExnetGraph& g, NetworkBundle& nets,
                      const TaskSpec& task, const Tokeniser& tokeniser,
                      Optimizer& opt, Mode mode, const TrialSeeds& seeds,
                      std::uint64_t trial, bool want_locals) {
    const TrainingExample ex = task.draw(seeds.task, trial);
    const LossFn loss = ex.loss.make();
    const auto tokens = tokeniser(ex.instance);

    auto up = up_pass(g, nets, tokens);
    const auto comp =
        down_pass(g, nets, up.primary, mode, mix_seed(seeds.sm_choice, trial));

    TrialResult result;
    result.prediction = up.prediction;
    result.loss_value = loss.value(up.prediction);
    result.grads = compute_gradients(g, nets, up.primary, comp, loss, mode);
    if (want_locals)
        result.locals = local_predictions(g, nets, up.primary, comp);
    opt.apply_update(nets, result.grads);
    return result;
}

}  // namespace exnet
