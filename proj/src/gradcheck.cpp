#include "exnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace exnet {

double GradCheckReport::max_rel() const {
    return std::max({primary, trainer, complementary});
}

double relative_error(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale <= 1e-6) return 0.0;
    return std::abs(a - b) / scale;
}

namespace {

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

struct ScalarEval {
    const ExnetGraph& g;
    const NetworkBundle& nets;
    const PrimaryCache& primary;
    const ComplementaryCache& comp;
    const LossFn& loss;

    double trainer_term(VertexId v) const {
        const auto out = forward(nets.spec(Role::trainer), nets.trainer_params(v),
                                 concat(primary.alpha[v], comp.vertex_beta[v]));
        return loss.value(out);
    }

    double propagator_term(VertexId v) const {
        const auto alpha =
            forward(nets.spec(Role::primary), nets.primary_params(v),
                    concat(primary.alpha[g.left_child(v)], primary.alpha[g.right_child(v)]));
        const auto out = forward(nets.spec(Role::trainer), nets.trainer_params(v),
                                 concat(alpha, comp.vertex_beta[v]));
        return loss.value(out);
    }

    std::vector<double> arc_extraction(ArcId a) const {
        return forward(nets.spec(Role::complementary), nets.complementary_params(a),
                       concat(comp.vertex_beta[g.arc(a).src],
                              primary.alpha[g.sibling_of_arc(a)]));
    }

    double complementary_term_sm(ArcId a) const {
        const VertexId v = g.arc(a).dst;
        const auto out = forward(nets.spec(Role::trainer), nets.trainer_params(v),
                                 concat(primary.alpha[v], arc_extraction(a)));
        return loss.value(out);
    }

    double complementary_term_dm(VertexId v) const {
        std::vector<double> beta;
        for (ArcId a : g.parent_arcs(v)) {
            const auto add = arc_extraction(a);
            if (beta.empty()) {
                beta = add;
            } else {
                for (std::size_t i = 0; i < beta.size(); ++i) beta[i] += add[i];
            }
        }
        const auto out = forward(nets.spec(Role::trainer), nets.trainer_params(v),
                                 concat(primary.alpha[v], beta));
        return loss.value(out);
    }
};

}  // namespace

GradCheckReport fd_gradcheck(const ExnetGraph& g, NetworkBundle& nets,
                             const PrimaryCache& primary,
                             const ComplementaryCache& comp, const LossFn& loss,
                             Mode mode, double h, double inject_error) {
    GradMap analytic = compute_gradients(g, nets, primary, comp, loss, mode);
    if (inject_error != 0.0 && !analytic.empty() &&
        !analytic.begin()->second.empty())
        analytic.begin()->second[0] += inject_error;

    const ScalarEval eval{g, nets, primary, comp, loss};
    GradCheckReport report;

    for (const auto& [gid, grad] : analytic) {
        const auto& group = nets.group(gid);

        // finite-difference target: the sum of this group's member terms
        auto target = [&]() -> double {
            double f = 0.0;
            switch (group.role) {
                case Role::trainer:
                    for (std::uint32_t v : group.members) f += eval.trainer_term(v);
                    return f;
                case Role::primary:
                    for (std::uint32_t v : group.members) f += eval.propagator_term(v);
                    return f;
                case Role::complementary:
                    if (mode == Mode::stochastic) {
                        for (std::uint32_t a : group.members)
                            f += eval.complementary_term_sm(a);
                    } else {
                        // the deterministic-mode term is one scalar per
                        // destination vertex, shared by all arcs into it
                        std::set<VertexId> dsts;
                        for (std::uint32_t a : group.members) dsts.insert(g.arc(a).dst);
                        for (VertexId v : dsts) f += eval.complementary_term_dm(v);
                    }
                    return f;
            }
            return f;
        };

        auto params = nets.group_params(gid);
        double* role_max = group.role == Role::primary     ? &report.primary
                           : group.role == Role::trainer   ? &report.trainer
                                                           : &report.complementary;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + h;
            const double plus = target();
            params[i] = saved - h;
            const double minus = target();
            params[i] = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            const double rel = relative_error(grad[i], numeric);
            if (rel > *role_max) *role_max = rel;
            if (rel >= report.max_rel()) {
                report.worst_group = gid;
                report.worst_index = i;
                report.worst_analytic = grad[i];
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace exnet
