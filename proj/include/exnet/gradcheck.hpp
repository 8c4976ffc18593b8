#ifndef EXNET_GRADCHECK_HPP
#define EXNET_GRADCHECK_HPP

#include <cstdint>

#include "exnet/bundle.hpp"
#include "exnet/graph.hpp"
#include "exnet/tasks.hpp"
#include "exnet/xprop.hpp"

namespace exnet {

struct GradCheckReport {
    // max relative error per network role
    double primary = 0.0;
    double trainer = 0.0;
    double complementary = 0.0;

    GroupId worst_group = kNoGroup;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;

    double max_rel() const;
};

// Central finite differences of the per-vertex/per-arc scalar losses against
// compute_gradients, with cached extractions held constant. The bundle is
// perturbed in place and restored. `inject_error` offsets one analytic entry
// (fault-injection hook for the failure path).
GradCheckReport fd_gradcheck(const ExnetGraph& g, NetworkBundle& nets,
                             const PrimaryCache& primary,
                             const ComplementaryCache& comp, const LossFn& loss,
                             Mode mode, double h = 1e-5,
                             double inject_error = 0.0);

// relative difference with a small dead zone for the near-zero case
double relative_error(double a, double b);

}  // namespace exnet

#endif
