#ifndef EXNET_XPROP_A_HPP
#define EXNET_XPROP_A_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "exnet/bundle.hpp"
#include "exnet/graph.hpp"
#include "exnet/tasks.hpp"
#include "exnet/xprop.hpp"

namespace exnet {

// Persistent per-(vertex, training-instance) extractions. Leaf alpha entries
// are pinned to the tokeniser output, the root beta entry to the zero vector.
struct ExtractionTable {
    // [vertex id][instance index]
    std::vector<std::vector<std::vector<double>>> alpha;
    std::vector<std::vector<std::vector<double>>> beta;

    std::size_t instance_count() const {
        return alpha.empty() ? 0 : alpha[0].size();
    }
};

struct EpochPlan {
    VertexId vertex = kNoVertex;
    std::uint32_t trials = 0;
    std::uint64_t reset_seed = 0;
};

struct TrialMetrics {
    std::uint64_t trial = 0;
    double loss = 0.0;
    double prediction_norm = 0.0;
    double grad_norm = 0.0;
    double local_disagreement = 0.0;
};

using MetricsSink = std::function<void(const TrialMetrics&)>;

struct XPropAConfig {
    std::uint32_t aeons = 1;
    std::uint32_t epoch_trials = 100;
    OptimizerConfig optimizer;
    std::uint64_t task_seed = 0;
    std::uint64_t reset_seed = 0;
};

struct AeonSummary {
    std::uint32_t aeon = 0;
    bool alpha_consistent = false;
    double max_abs_diff = 0.0;
    double mean_train_loss = 0.0;  // via fresh up passes at aeon end
};

// Every internal vertex exactly once, children (that are internal) first.
std::vector<VertexId> aeon_schedule(const ExnetGraph& g);

// Leaf entries from the tokeniser, internal entries from one up pass plus one
// deterministic-mode down pass with the current parameters.
ExtractionTable init_tables(const ExnetGraph& g, const NetworkBundle& nets,
                            const TrainingSet& set, const Tokeniser& tokeniser);

// Resets the vertex's trainer, primary propagator and incoming complementary
// propagators, then runs `trials` optimizer steps on the local objective
// L(T(theta_T, F(theta_p, alpha(lch), alpha(rch)), sum_z G(theta_c, beta(z),
// alpha(sibling)))) with all cached extractions constant. Requires an
// unshared bundle.
void run_epoch(const EpochPlan& plan, const ExnetGraph& g, NetworkBundle& nets,
               const ExtractionTable& tables, const TrainingSet& set,
               const OptimizerConfig& opt, std::uint64_t task_seed,
               std::uint64_t trial_offset = 0, const MetricsSink& sink = {});

// Rewrites alpha(v, x) and beta(v, x) for every instance from the current
// parameters and the current child/parent entries.
void finalize_epoch(VertexId v, const ExnetGraph& g, const NetworkBundle& nets,
                    ExtractionTable& tables);

// Full loop: aeons of children-first epochs with per-aeon alpha consistency
// checks against fresh up passes.
std::vector<AeonSummary> run_aeons(const ExnetGraph& g, NetworkBundle& nets,
                                   const TrainingSet& set,
                                   const Tokeniser& tokeniser,
                                   const XPropAConfig& config,
                                   const MetricsSink& sink = {});

}  // namespace exnet

#endif
