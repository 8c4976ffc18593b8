#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "exnet/rng.hpp"
#include "exnet/tasks.hpp"

using namespace exnet;

namespace {

double fd_max_rel(const LossFn& loss, std::vector<double> y) {
    const double h = 1e-6;
    const auto analytic = loss.grad(y);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double saved = y[i];
        y[i] = saved + h;
        const double plus = loss.value(y);
        y[i] = saved - h;
        const double minus = loss.value(y);
        y[i] = saved;
        const double numeric = (plus - minus) / (2 * h);
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / scale);
    }
    return max_rel;
}

}  // namespace

TEST_CASE("partition tokeniser slices consecutive blocks") {
    const auto tok = Tokeniser::identity(2, 2);
    const auto tokens = tok(std::vector<double>{1, 2, 3, 4});
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0] == std::vector<double>{1, 2});
    CHECK(tokens[1] == std::vector<double>{3, 4});

    const auto zeros = tok(std::vector<double>{0, 0, 0, 0});
    CHECK(zeros[0] == std::vector<double>{0, 0});
    CHECK(zeros[1] == std::vector<double>{0, 0});
}

TEST_CASE("partition tokeniser zero-pads a short instance") {
    const auto tok = Tokeniser::identity(2, 3);
    const auto tokens = tok(std::vector<double>{1, 2, 3, 4, 5});
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[2] == std::vector<double>{5, 0});
}

TEST_CASE("null-bound leaves tokenise to zero vectors") {
    const Tokeniser tok(2, 2, {std::uint32_t{1}, std::nullopt, std::uint32_t{0}});
    const auto tokens = tok(std::vector<double>{1, 2, 3, 4});
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == std::vector<double>{3, 4});
    CHECK(tokens[1] == std::vector<double>{0, 0});
    CHECK(tokens[2] == std::vector<double>{1, 2});
}

TEST_CASE("squared loss closed forms") {
    const auto at_target = squared_loss({1.0, -2.0});
    CHECK(at_target.value(std::vector<double>{1.0, -2.0}) == 0.0);
    CHECK(at_target.grad(std::vector<double>{1.0, -2.0}) == std::vector<double>{0.0, 0.0});

    const auto zero_target = squared_loss({0.0, 0.0});
    CHECK(zero_target.value(std::vector<double>{3.0, 4.0}) == 25.0);
    CHECK(zero_target.grad(std::vector<double>{3.0, 4.0}) == std::vector<double>{6.0, 8.0});

    CHECK_THROWS_AS(zero_target.value(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("softmax cross entropy closed forms") {
    const auto loss = softmax_xent_loss(0, 2);
    CHECK(loss.value(std::vector<double>{0.3, 0.3}) == doctest::Approx(std::log(2.0)));
    for (std::uint64_t s = 0; s < 8; ++s) {
        Rng rng(s);
        std::vector<double> y{rng.next_uniform(-3, 3), rng.next_uniform(-3, 3)};
        const auto g = loss.grad(y);
        CHECK(g[0] + g[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(softmax_xent_loss(2, 2), std::invalid_argument);
}

TEST_CASE("shipped losses pass the finite-difference audit at 64 points") {
    Rng rng(404);
    for (int i = 0; i < 32; ++i) {
        std::vector<double> target(3), y(3);
        for (double& x : target) x = rng.next_uniform(-2, 2);
        for (double& x : y) x = rng.next_uniform(-2, 2);
        CHECK(fd_max_rel(squared_loss(target), y) <= 1e-6);
    }
    for (int i = 0; i < 32; ++i) {
        std::vector<double> y(4);
        for (double& x : y) x = rng.next_uniform(-3, 3);
        CHECK(fd_max_rel(softmax_xent_loss(i % 4, 4), y) <= 1e-6);
    }
}

TEST_CASE("token_sum targets equal the token sum") {
    TaskParams params;
    params.slots = 4;
    params.d_p = 3;
    const TaskSpec task = make_task("token_sum_regression", params, 5);
    CHECK(task.output_dim == 3);
    for (std::uint64_t t = 0; t < 10; ++t) {
        const auto ex = task.draw(17, t);
        REQUIRE(ex.instance.size() == 12);
        std::vector<double> sum(3, 0.0);
        for (std::size_t s = 0; s < 4; ++s)
            for (std::size_t j = 0; j < 3; ++j) sum[j] += ex.instance[s * 3 + j];
        REQUIRE(ex.loss.kind == LossDesc::Kind::squared);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(ex.loss.target[j] == doctest::Approx(sum[j]).epsilon(1e-15));
    }
}

TEST_CASE("parity labels follow the sign product") {
    TaskParams params;
    params.slots = 3;
    params.d_p = 4;
    const TaskSpec task = make_task("parity_classification", params, 6);
    CHECK(task.output_dim == 2);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto ex = task.draw(23, t);
        int product = 1;
        for (std::size_t s = 0; s < 3; ++s) {
            const double v = ex.instance[s * 4];
            REQUIRE(std::abs(v) == 1.0);
            product *= v > 0 ? 1 : -1;
        }
        CHECK(ex.loss.class_index == (product < 0 ? 1u : 0u));
    }
}

TEST_CASE("memorize_k picks instances uniformly") {
    TaskParams params;
    params.slots = 2;
    params.d_p = 2;
    params.k = 4;
    const TaskSpec task = make_task("memorize_k", params, 7);
    REQUIRE(task.fixed_set);
    REQUIRE(task.fixed_set->size() == 4);

    std::vector<int> counts(4, 0);
    const int n = 10000;
    for (int t = 0; t < n; ++t) {
        const auto ex = task.draw(31, static_cast<std::uint64_t>(t));
        bool matched = false;
        for (std::size_t i = 0; i < 4; ++i) {
            if (ex.instance == (*task.fixed_set)[i].instance) {
                ++counts[i];
                matched = true;
                break;
            }
        }
        CHECK(matched);
    }
    const double expect = n / 4.0;
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    for (int c : counts) CHECK(std::abs(c - expect) <= 3.0 * sigma);
}

TEST_CASE("draws are reproducible per seed and differ across trials") {
    TaskParams params;
    params.slots = 2;
    params.d_p = 2;
    const TaskSpec task = make_task("token_sum_regression", params, 8);
    CHECK(task.draw(5, 0).instance == task.draw(5, 0).instance);
    CHECK(task.draw(5, 0).instance != task.draw(5, 1).instance);
    CHECK(task.draw(5, 0).instance != task.draw(6, 0).instance);
}

TEST_CASE("training sets export and import losslessly") {
    TaskParams params;
    params.slots = 2;
    params.d_p = 2;
    params.k = 3;
    const TaskSpec task = make_task("memorize_k", params, 9);
    const auto set = task.make_training_set(0, 0);
    const auto path =
        (std::filesystem::temp_directory_path() / "exnet_tset_test.json").string();
    export_training_set(set, path);
    const auto loaded = import_training_set(path);
    REQUIRE(loaded.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(loaded[i].instance == set[i].instance);
        CHECK(loaded[i].loss.target == set[i].loss.target);
        CHECK(loaded[i].loss.kind == set[i].loss.kind);
    }
    std::remove(path.c_str());
}
