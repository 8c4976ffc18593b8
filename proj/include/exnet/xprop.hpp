#ifndef EXNET_XPROP_HPP
#define EXNET_XPROP_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "exnet/bundle.hpp"
#include "exnet/graph.hpp"
#include "exnet/tasks.hpp"

namespace exnet {

// Down-pass handling of multiple parents: stochastic picks one parent arc
// uniformly, deterministic sums all arc extractions. Identical on trees.
enum class Mode : std::uint8_t { stochastic, deterministic };

// Primary extractions, one vector of dim d_p per alive vertex.
struct PrimaryCache {
    std::vector<std::vector<double>> alpha;  // indexed by VertexId
};

// Complementary extractions: one vector per internal vertex (root pinned to
// zero), one per arc with internal destination, plus the stochastic-mode
// parent choices.
struct ComplementaryCache {
    std::vector<std::vector<double>> vertex_beta;  // indexed by VertexId
    std::vector<std::vector<double>> arc_beta;     // indexed by ArcId
    std::vector<ArcId> sm_choice;                  // kNoArc where not applicable
};

struct UpPassResult {
    PrimaryCache primary;
    std::vector<double> prediction;
};

struct TrialResult {
    std::vector<double> prediction;  // pre-update
    double loss_value = 0.0;
    GradMap grads;
    // per-vertex trainer outputs, when requested
    std::optional<std::vector<std::vector<double>>> locals;
};

struct TrialSeeds {
    std::uint64_t task = 0;
    std::uint64_t sm_choice = 0;
};

// Leaf extractions in leaf order -> all alpha values plus the root prediction
// T(theta_T(root), alpha(root), 0).
UpPassResult up_pass(const ExnetGraph& g, const NetworkBundle& nets,
                     const std::vector<std::vector<double>>& tokens);

// Computes every arc extraction G(theta_c(z,v), beta(z), alpha(sibling)) and
// combines them per mode. The stochastic choices are a pure function of
// (choice_seed, vertex).
ComplementaryCache down_pass(const ExnetGraph& g, const NetworkBundle& nets,
                             const PrimaryCache& primary, Mode mode,
                             std::uint64_t choice_seed);

// Local gradients for all trainers, primary propagators and complementary
// propagators, with cached extractions treated as constants and shared groups
// summed. Trainer parameters receive gradients only from their own loss term.
GradMap compute_gradients(const ExnetGraph& g, const NetworkBundle& nets,
                          const PrimaryCache& primary,
                          const ComplementaryCache& comp, const LossFn& loss,
                          Mode mode);

// Trainer output T(theta_T(v), alpha(v), beta(v)) for every internal vertex;
// empty vectors elsewhere.
std::vector<std::vector<double>> local_predictions(const ExnetGraph& g,
                                                   const NetworkBundle& nets,
                                                   const PrimaryCache& primary,
                                                   const ComplementaryCache& comp);

// max over internal vertices of ||local(v) - local(root)||_2
double local_disagreement(const ExnetGraph& g,
                          const std::vector<std::vector<double>>& locals);

// One full trial: draw -> tokenise -> up pass -> down pass -> gradients ->
// update. Returns the pre-update prediction and loss.
TrialResult run_trial(const ExnetGraph& g, NetworkBundle& nets,
                      const TaskSpec& task, const Tokeniser& tokeniser,
                      Optimizer& opt, Mode mode, const TrialSeeds& seeds,
                      std::uint64_t trial, bool want_locals = false);

}  // namespace exnet

#endif
