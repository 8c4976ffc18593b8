#include "exnet/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "exnet/rng.hpp"

namespace exnet {

void MlpSpec::validate() const {
    if (input_dim == 0 || output_dim == 0)
        throw std::invalid_argument("MlpSpec: dims must be >= 1");
    for (std::uint32_t h : hidden_dims)
        if (h == 0) throw std::invalid_argument("MlpSpec: dims must be >= 1");
    if (activation == Activation::identity && !hidden_dims.empty())
        throw std::invalid_argument("MlpSpec: identity activation only for the final layer");
}

std::vector<std::uint32_t> MlpSpec::layer_dims() const {
    std::vector<std::uint32_t> dims;
    dims.reserve(hidden_dims.size() + 2);
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(output_dim);
    return dims;
}

std::size_t MlpSpec::param_count() const {
    const auto dims = layer_dims();
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        total += static_cast<std::size_t>(dims[l + 1]) * (dims[l] + 1);
    return total;
}

namespace {

double activate(Activation act, double x) {
    switch (act) {
        case Activation::tanh: return std::tanh(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::identity: return x;
    }
    return x;
}

// derivative expressed through the activation output
double activate_deriv(Activation act, double y) {
    switch (act) {
        case Activation::tanh: return 1.0 - y * y;
        case Activation::relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

}  // namespace

std::vector<double> init_params(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<double> params(spec.param_count());
    const auto dims = spec.layer_dims();
    Rng rng(seed);
    std::size_t at = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::uint32_t fan_in = dims[l];
        const std::uint32_t fan_out = dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::uint32_t i = 0; i < fan_out * fan_in; ++i)
            params[at++] = rng.next_uniform(-bound, bound);
        at += fan_out;  // biases stay zero
    }
    return params;
}

std::vector<double> forward(const MlpSpec& spec, std::span<const double> params,
                            std::span<const double> input) {
    spec.validate();
    if (params.size() != spec.param_count())
        throw std::invalid_argument("forward: parameter length mismatch");
    if (input.size() != spec.input_dim)
        throw std::invalid_argument("forward: input length mismatch");

    const auto dims = spec.layer_dims();
    std::vector<double> act(input.begin(), input.end());
    std::size_t at = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::uint32_t in = dims[l];
        const std::uint32_t out = dims[l + 1];
        const bool last = l + 2 == dims.size();
        std::vector<double> next(out);
        for (std::uint32_t i = 0; i < out; ++i) {
            double z = params[at + static_cast<std::size_t>(out) * in + i];  // bias
            const double* w = &params[at + static_cast<std::size_t>(i) * in];
            for (std::uint32_t j = 0; j < in; ++j) z += w[j] * act[j];
            next[i] = last ? z : activate(spec.activation, z);
        }
        act = std::move(next);
        at += static_cast<std::size_t>(out) * (in + 1);
    }
    return act;
}

BackwardResult backward(const MlpSpec& spec, std::span<const double> params,
                        std::span<const double> input,
                        std::span<const double> upstream) {
    spec.validate();
    if (params.size() != spec.param_count())
        throw std::invalid_argument("backward: parameter length mismatch");
    if (input.size() != spec.input_dim)
        throw std::invalid_argument("backward: input length mismatch");
    if (upstream.size() != spec.output_dim)
        throw std::invalid_argument("backward: upstream length mismatch");

    const auto dims = spec.layer_dims();
    const std::size_t layers = dims.size() - 1;

    // forward pass keeping every layer's activation output
    std::vector<std::vector<double>> acts(layers + 1);
    acts[0].assign(input.begin(), input.end());
    std::vector<std::size_t> offsets(layers);
    std::size_t at = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offsets[l] = at;
        const std::uint32_t in = dims[l];
        const std::uint32_t out = dims[l + 1];
        const bool last = l + 1 == layers;
        acts[l + 1].resize(out);
        for (std::uint32_t i = 0; i < out; ++i) {
            double z = params[at + static_cast<std::size_t>(out) * in + i];
            const double* w = &params[at + static_cast<std::size_t>(i) * in];
            for (std::uint32_t j = 0; j < in; ++j) z += w[j] * acts[l][j];
            acts[l + 1][i] = last ? z : activate(spec.activation, z);
        }
        at += static_cast<std::size_t>(out) * (in + 1);
    }

    BackwardResult result;
    result.param_grad.assign(params.size(), 0.0);
    std::vector<double> delta(upstream.begin(), upstream.end());

    for (std::size_t l = layers; l-- > 0;) {
        const std::uint32_t in = dims[l];
        const std::uint32_t out = dims[l + 1];
        const bool last = l + 1 == layers;
        const std::size_t base = offsets[l];

        if (!last) {
            for (std::uint32_t i = 0; i < out; ++i)
                delta[i] *= activate_deriv(spec.activation, acts[l + 1][i]);
        }
        std::vector<double> prev(in, 0.0);
        for (std::uint32_t i = 0; i < out; ++i) {
            const double d = delta[i];
            const std::size_t wrow = base + static_cast<std::size_t>(i) * in;
            for (std::uint32_t j = 0; j < in; ++j) {
                result.param_grad[wrow + j] += d * acts[l][j];
                prev[j] += params[wrow + j] * d;
            }
            result.param_grad[base + static_cast<std::size_t>(out) * in + i] += d;
        }
        delta = std::move(prev);
    }
    result.input_grad = std::move(delta);
    return result;
}

}  // namespace exnet
