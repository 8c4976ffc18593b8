#include "exnet/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "exnet/rng.hpp"
#include "json.hpp"

namespace exnet {

LossFn LossDesc::make() const {
    switch (kind) {
        case Kind::squared: return squared_loss(target);
        case Kind::softmax_xent: return softmax_xent_loss(class_index, num_classes);
    }
    throw std::invalid_argument("LossDesc: bad kind");
}

LossFn squared_loss(std::vector<double> target) {
    auto check = [target](std::span<const double> y) {
        if (y.size() != target.size())
            throw std::invalid_argument("squared_loss: dimension mismatch");
    };
    LossFn loss;
    loss.value = [target, check](std::span<const double> y) {
        check(y);
        double sum = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = y[i] - target[i];
            sum += d * d;
        }
        return sum;
    };
    loss.grad = [target, check](std::span<const double> y) {
        check(y);
        std::vector<double> g(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * (y[i] - target[i]);
        return g;
    };
    return loss;
}

namespace {

std::vector<double> softmax(std::span<const double> logits) {
    const double hi = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - hi);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

}  // namespace

LossFn softmax_xent_loss(std::uint32_t class_index, std::uint32_t num_classes) {
    if (class_index >= num_classes)
        throw std::invalid_argument("softmax_xent_loss: class index out of range");
    auto check = [num_classes](std::span<const double> y) {
        if (y.size() != num_classes)
            throw std::invalid_argument("softmax_xent_loss: dimension mismatch");
    };
    LossFn loss;
    loss.value = [class_index, check](std::span<const double> y) {
        check(y);
        const double hi = *std::max_element(y.begin(), y.end());
        double sum = 0.0;
        for (double v : y) sum += std::exp(v - hi);
        return std::log(sum) + hi - y[class_index];
    };
    loss.grad = [class_index, check](std::span<const double> y) {
        check(y);
        std::vector<double> g = softmax(y);
        g[class_index] -= 1.0;
        return g;
    };
    return loss;
}

Tokeniser::Tokeniser(std::uint32_t d_p, std::uint32_t slot_count,
                     std::vector<std::optional<std::uint32_t>> leaf_slots)
    : d_p_(d_p), slot_count_(slot_count), leaf_slots_(std::move(leaf_slots)) {
    if (d_p_ == 0) throw std::invalid_argument("Tokeniser: d_p must be >= 1");
    for (const auto& slot : leaf_slots_)
        if (slot && *slot >= slot_count_)
            throw std::invalid_argument("Tokeniser: slot out of range");
}

Tokeniser Tokeniser::identity(std::uint32_t d_p, std::uint32_t leaf_count) {
    std::vector<std::optional<std::uint32_t>> slots(leaf_count);
    for (std::uint32_t i = 0; i < leaf_count; ++i) slots[i] = i;
    return Tokeniser(d_p, leaf_count, std::move(slots));
}

std::vector<std::vector<double>> Tokeniser::operator()(std::span<const double> instance) const {
    std::vector<std::vector<double>> tokens(leaf_slots_.size());
    for (std::size_t i = 0; i < leaf_slots_.size(); ++i) {
        std::vector<double> tok(d_p_, 0.0);
        if (leaf_slots_[i]) {
            const std::size_t start = static_cast<std::size_t>(*leaf_slots_[i]) * d_p_;
            for (std::uint32_t j = 0; j < d_p_; ++j)
                if (start + j < instance.size()) tok[j] = instance[start + j];
        }
        tokens[i] = std::move(tok);
    }
    return tokens;
}

TrainingSet TaskSpec::make_training_set(std::size_t size, std::uint64_t seed) const {
    if (fixed_set) return *fixed_set;
    TrainingSet set;
    set.reserve(size);
    for (std::size_t t = 0; t < size; ++t) set.push_back(draw(seed, t));
    return set;
}

namespace {

TaskSpec make_token_sum(const TaskParams& params) {
    TaskSpec task;
    task.name = "token_sum_regression";
    task.d_p = params.d_p;
    task.slot_count = params.slots;
    task.output_dim = params.output_dim == 0 ? params.d_p : params.output_dim;
    if (task.output_dim > task.d_p)
        throw std::invalid_argument("token_sum_regression: output_dim must be <= d_p");
    const std::uint32_t d_p = task.d_p;
    const std::uint32_t slots = task.slot_count;
    const std::uint32_t out = task.output_dim;
    task.draw = [d_p, slots, out](std::uint64_t seed, std::uint64_t trial) {
        Rng rng(mix_seed(seed, trial));
        TrainingExample ex;
        ex.instance.resize(static_cast<std::size_t>(d_p) * slots);
        for (double& x : ex.instance) x = rng.next_uniform(-1.0, 1.0);
        ex.loss.kind = LossDesc::Kind::squared;
        ex.loss.target.assign(out, 0.0);
        for (std::uint32_t s = 0; s < slots; ++s)
            for (std::uint32_t j = 0; j < out; ++j)
                ex.loss.target[j] += ex.instance[static_cast<std::size_t>(s) * d_p + j];
        return ex;
    };
    return task;
}

TaskSpec make_parity(const TaskParams& params) {
    TaskSpec task;
    task.name = "parity_classification";
    task.d_p = params.d_p;
    task.slot_count = params.slots;
    task.output_dim = 2;
    const std::uint32_t d_p = task.d_p;
    const std::uint32_t slots = task.slot_count;
    task.draw = [d_p, slots](std::uint64_t seed, std::uint64_t trial) {
        Rng rng(mix_seed(seed, trial));
        TrainingExample ex;
        ex.instance.assign(static_cast<std::size_t>(d_p) * slots, 0.0);
        int product = 1;
        for (std::uint32_t s = 0; s < slots; ++s) {
            const int sign = rng.next_index(2) == 0 ? 1 : -1;
            product *= sign;
            ex.instance[static_cast<std::size_t>(s) * d_p] = static_cast<double>(sign);
            // one-hot positional tag so depth-shared parameters can tell slots apart
            if (d_p > 1) ex.instance[static_cast<std::size_t>(s) * d_p + 1 + s % (d_p - 1)] = 1.0;
        }
        ex.loss.kind = LossDesc::Kind::softmax_xent;
        ex.loss.class_index = product < 0 ? 1 : 0;
        ex.loss.num_classes = 2;
        return ex;
    };
    return task;
}

TaskSpec make_memorize(const TaskParams& params, std::uint64_t seed) {
    TaskSpec task;
    task.name = "memorize_k";
    task.d_p = params.d_p;
    task.slot_count = params.slots;
    task.output_dim = params.output_dim == 0 ? 2 : params.output_dim;
    if (params.k == 0) throw std::invalid_argument("memorize_k: k must be >= 1");

    TrainingSet set(params.k);
    Rng rng(mix_seed(seed, 0x6d656d6f));
    for (auto& ex : set) {
        ex.instance.resize(static_cast<std::size_t>(task.d_p) * task.slot_count);
        for (double& x : ex.instance) x = rng.next_uniform(-1.0, 1.0);
        ex.loss.kind = LossDesc::Kind::squared;
        ex.loss.target.resize(task.output_dim);
        for (double& x : ex.loss.target) x = rng.next_uniform(-1.0, 1.0);
    }
    task.fixed_set = set;
    const std::uint32_t k = params.k;
    task.draw = [set, k](std::uint64_t s, std::uint64_t trial) {
        Rng pick(mix_seed(s, trial));
        return set[pick.next_index(k)];
    };
    return task;
}

}  // namespace

TaskSpec make_task(const std::string& name, const TaskParams& params, std::uint64_t seed) {
    if (params.slots == 0 || params.d_p == 0)
        throw std::invalid_argument("make_task: slots and d_p must be >= 1");
    if (name == "token_sum_regression") return make_token_sum(params);
    if (name == "parity_classification") return make_parity(params);
    if (name == "memorize_k") return make_memorize(params, seed);
    throw std::invalid_argument("make_task: unknown task " + name);
}

void export_training_set(const TrainingSet& set, const std::string& path) {
    nlohmann::json root = nlohmann::json::array();
    for (const auto& ex : set) {
        nlohmann::json item;
        item["instance"] = ex.instance;
        if (ex.loss.kind == LossDesc::Kind::squared) {
            item["loss"] = {{"kind", "squared"}, {"target", ex.loss.target}};
        } else {
            item["loss"] = {{"kind", "softmax_xent"},
                            {"class_index", ex.loss.class_index},
                            {"num_classes", ex.loss.num_classes}};
        }
        root.push_back(std::move(item));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_training_set: cannot open " + path);
    out << root.dump(2) << "\n";
}

TrainingSet import_training_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_training_set: cannot open " + path);
    nlohmann::json root = nlohmann::json::parse(in);
    TrainingSet set;
    for (const auto& item : root) {
        TrainingExample ex;
        ex.instance = item.at("instance").get<std::vector<double>>();
        const auto& loss = item.at("loss");
        const std::string kind = loss.at("kind").get<std::string>();
        if (kind == "squared") {
            ex.loss.kind = LossDesc::Kind::squared;
            ex.loss.target = loss.at("target").get<std::vector<double>>();
        } else if (kind == "softmax_xent") {
            ex.loss.kind = LossDesc::Kind::softmax_xent;
            ex.loss.class_index = loss.at("class_index").get<std::uint32_t>();
            ex.loss.num_classes = loss.at("num_classes").get<std::uint32_t>();
        } else {
            throw std::runtime_error("import_training_set: unknown loss kind " + kind);
        }
        set.push_back(std::move(ex));
    }
    return set;
}

}  // namespace exnet
