#ifndef EXNET_MLP_HPP
#define EXNET_MLP_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace exnet {

enum class Activation { tanh, relu, identity };

// Fully connected network shape. `activation` applies to hidden layers; the
// output layer is always affine. `identity` is therefore only accepted when
// there are no hidden layers.
struct MlpSpec {
    std::uint32_t input_dim = 1;
    std::vector<std::uint32_t> hidden_dims;
    std::uint32_t output_dim = 1;
    Activation activation = Activation::tanh;

    // throws std::invalid_argument on zero dims or misplaced identity
    void validate() const;

    // flat parameter count: per layer a row-major weight matrix then a bias
    std::size_t param_count() const;

    // [input, hidden..., output]
    std::vector<std::uint32_t> layer_dims() const;

    bool operator==(const MlpSpec&) const = default;
};

struct BackwardResult {
    std::vector<double> param_grad;
    std::vector<double> input_grad;
};

// Fan-in scaled uniform weights, zero biases; identical output for identical
// (spec, seed) on any platform.
std::vector<double> init_params(const MlpSpec& spec, std::uint64_t seed);

// Pure forward evaluation. Throws on length mismatch.
std::vector<double> forward(const MlpSpec& spec, std::span<const double> params,
                            std::span<const double> input);

// Exact reverse-mode gradients of <upstream, forward(spec, params, input)>
// with respect to params and input.
BackwardResult backward(const MlpSpec& spec, std::span<const double> params,
                        std::span<const double> input,
                        std::span<const double> upstream);

}  // namespace exnet

#endif
