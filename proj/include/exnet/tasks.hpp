#ifndef EXNET_TASKS_HPP
#define EXNET_TASKS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace exnet {

// Differentiable loss over prediction vectors: value plus analytic gradient.
struct LossFn {
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> grad;
};

// Serialisable loss description (fixed training sets are written to disk).
struct LossDesc {
    enum class Kind : std::uint8_t { squared, softmax_xent };
    Kind kind = Kind::squared;
    std::vector<double> target;      // squared
    std::uint32_t class_index = 0;   // softmax_xent
    std::uint32_t num_classes = 2;

    LossFn make() const;
};

LossFn squared_loss(std::vector<double> target);
LossFn softmax_xent_loss(std::uint32_t class_index, std::uint32_t num_classes);

// Maps a flat instance to one token per leaf. Slot tokens are consecutive
// d_p-sized blocks of the instance (zero padded past its end); the binding
// assigns each leaf a slot, or none for a zero token.
class Tokeniser {
public:
    Tokeniser(std::uint32_t d_p, std::uint32_t slot_count,
              std::vector<std::optional<std::uint32_t>> leaf_slots);

    // leaf i <- slot i
    static Tokeniser identity(std::uint32_t d_p, std::uint32_t leaf_count);

    std::vector<std::vector<double>> operator()(std::span<const double> instance) const;

    std::uint32_t token_dim() const { return d_p_; }
    std::uint32_t slot_count() const { return slot_count_; }
    std::size_t leaf_count() const { return leaf_slots_.size(); }

private:
    std::uint32_t d_p_;
    std::uint32_t slot_count_;
    std::vector<std::optional<std::uint32_t>> leaf_slots_;
};

struct TrainingExample {
    std::vector<double> instance;
    LossDesc loss;
};

using TrainingSet = std::vector<TrainingExample>;

// Instance distribution + loss factory + token layout. `draw` is a pure
// function of (seed, trial): the stream is i.i.d. across trials and
// reproducible.
struct TaskSpec {
    std::string name;
    std::uint32_t d_p = 8;
    std::uint32_t slot_count = 4;
    std::uint32_t output_dim = 1;
    std::function<TrainingExample(std::uint64_t seed, std::uint64_t trial)> draw;
    std::optional<TrainingSet> fixed_set;  // memorize_k

    TrainingSet make_training_set(std::size_t size, std::uint64_t seed) const;
};

struct TaskParams {
    std::uint32_t slots = 4;       // token slots (= leaves of a plain tree)
    std::uint32_t d_p = 8;
    std::uint32_t output_dim = 0;  // 0 = task default
    std::uint32_t k = 4;           // memorize_k only
};

// name in {token_sum_regression, parity_classification, memorize_k}
TaskSpec make_task(const std::string& name, const TaskParams& params, std::uint64_t seed);

void export_training_set(const TrainingSet& set, const std::string& path);
TrainingSet import_training_set(const std::string& path);

}  // namespace exnet

#endif
