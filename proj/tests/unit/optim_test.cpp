#include "amgae/gradcheck.hpp"
#include "amgae/kernels.hpp"
#include "amgae/optim.hpp"

#include <cmath>
#include <cstring>
#include <doctest.h>

#include "test_util.hpp"

using namespace amgae;
using testutil::random_tensor;

TEST_CASE("param store registers, indexes, and rejects duplicates") {
    ParamStore store;
    store.add("w", Tensor(2, 3));
    store.add("b", Tensor(1, 3));
    CHECK(store.has("w"));
    CHECK_FALSE(store.has("missing"));
    CHECK(store.total_params() == 9);
    CHECK(store.slots().size() == 2);
    CHECK_THROWS_AS(store.add("w", Tensor(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(store.slot("missing"), std::invalid_argument);

    store.grad("w").fill(4.0);
    store.zero_grads();
    for (index_t i = 0; i < store.grad("w").size(); ++i) CHECK(store.grad("w").data()[i] == 0.0);
}

TEST_CASE("first adam step moves by about -lr times sign of the gradient") {
    ParamStore store;
    Tensor init(1, 2);
    init.at(0, 0) = 1.0;
    init.at(0, 1) = -2.0;
    store.add("p", init);
    store.grad("p").at(0, 0) = 3.0;   // |g| >> eps
    store.grad("p").at(0, 1) = -0.5;

    AdamConfig cfg;
    adam_step(store, cfg);
    CHECK(store.value("p").at(0, 0) == doctest::Approx(1.0 - cfg.lr).epsilon(1e-6));
    CHECK(store.value("p").at(0, 1) == doctest::Approx(-2.0 + cfg.lr).epsilon(1e-6));
    CHECK(store.step_count() == 1);
    // grads zeroed after the step
    CHECK(store.grad("p").at(0, 0) == 0.0);
}

TEST_CASE("zero gradient leaves the parameter unchanged") {
    ParamStore store;
    Tensor init(1, 1);
    init.at(0, 0) = 0.75;
    store.add("p", init);
    adam_step(store, AdamConfig{});
    CHECK(store.value("p").at(0, 0) == 0.75);
}

TEST_CASE("two steps with constant unit gradient move about -0.2 at lr 0.1") {
    ParamStore store;
    store.add("p", Tensor(1, 1));
    AdamConfig cfg;
    cfg.lr = 0.1;
    for (int s = 0; s < 2; ++s) {
        store.grad("p").at(0, 0) = 1.0;
        adam_step(store, cfg);
    }
    CHECK(std::abs(store.value("p").at(0, 0) - (-0.2)) < 1e-3);
    CHECK(store.step_count() == 2);
}

TEST_CASE("adam is deterministic given identical slot state") {
    RngStream rng(601);
    auto run = [&](std::uint64_t seed) {
        RngStream local(seed);
        ParamStore store;
        store.add("p", random_tensor(3, 4, local));
        AdamConfig cfg;
        for (int s = 0; s < 5; ++s) {
            Tensor& g = store.grad("p");
            for (index_t i = 0; i < g.size(); ++i)
                g.data()[i] = std::sin(static_cast<double>(i + s));
            adam_step(store, cfg);
        }
        return store.value("p");
    };
    Tensor a = run(7);
    Tensor b = run(7);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

TEST_CASE("grad check on a linear map is exact to 1e-8") {
    RngStream rng(602);
    ParamStore store;
    store.add("W", random_tensor(3, 4, rng));
    Tensor x = random_tensor(5, 3, rng);

    auto loss_fn = [&] {
        Tensor y;
        kernels::matmul(x, store.value("W"), y);
        double s = 0.0;
        for (index_t i = 0; i < y.size(); ++i) s += y.data()[i];
        return s;
    };
    auto compute = [&] {
        store.zero_grads();
        // d loss / d W = x^T * ones
        Tensor ones(5, 4);
        ones.fill(1.0);
        kernels::matmul_at_b(x, ones, store.grad("W"), /*accumulate=*/true);
    };
    CHECK(grad_check(loss_fn, compute, store, rng) < 1e-8);
}

TEST_CASE("grad check flags a wrong gradient") {
    RngStream rng(603);
    ParamStore store;
    store.add("W", random_tensor(2, 2, rng));
    auto loss_fn = [&] {
        double s = 0.0;
        const Tensor& w = store.value("W");
        for (index_t i = 0; i < w.size(); ++i) s += w.data()[i] * w.data()[i];
        return s;
    };
    auto compute = [&] {
        store.zero_grads();
        store.grad("W").fill(1.0);  // deliberately wrong (true grad is 2W)
    };
    CHECK(grad_check(loss_fn, compute, store, rng) > 1e-2);
}
