#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "stef/ops.hpp"
#include "stef/tensor.hpp"

using namespace stef;

TEST_CASE("tensor construction and invariants") {
    Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.size() == 6);
    CHECK(t.shape() == Shape{2, 3});
    CHECK(t.all_finite_values());
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor::from({4}, {1, 2, 3, 4}).item(), std::invalid_argument);

    Tensor v = t.reshaped({6});
    CHECK(v.shape() == Shape{6});
    v.data()[0] = 42;  // shared storage
    CHECK(t.data()[0] == 42);

    Tensor c = t.clone();
    c.data()[0] = -1;
    CHECK(t.data()[0] == 42);
}

TEST_CASE("backward of a sum is all ones") {
    Tape tape;
    Tensor x = Tensor::from({2, 2}, {1, -2, 3, 0});
    Tensor loss = ops::sum_all(tape, x);
    tape.backward(loss);
    for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of mean absolute error is sign/count") {
    Tape tape;
    Tensor x = Tensor::from({4}, {1.0, 2.0, 3.0, 4.0});
    Tensor y = Tensor::from({4}, {2.0, 2.0, 1.0, 4.0});
    Tensor loss = ops::mean_all(tape, ops::abs(tape, ops::sub(tape, x, y)));
    tape.backward(loss);
    // x - y = {-1, 0, 2, 0}; sign/4 with sign(0) = 0
    const std::vector<double> want = {-0.25, 0.0, 0.25, 0.0};
    for (size_t i = 0; i < 4; ++i) CHECK(x.grad()[i] == doctest::Approx(want[i]));
}

TEST_CASE("backward rejects a non-scalar loss") {
    Tape tape;
    Tensor x = Tensor::from({2}, {1, 2});
    Tensor y = ops::add(tape, x, x);
    CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
}

TEST_CASE("unreachable leaves get zero gradient") {
    Tape tape;
    Tensor x = Tensor::from({2}, {1, 2});
    Tensor orphan = Tensor::from({3}, {5, 5, 5});
    tape.watch(orphan);
    Tensor loss = ops::sum_all(tape, x);
    tape.backward(loss);
    REQUIRE(orphan.has_grad());
    for (double g : orphan.grad()) CHECK(g == 0.0);
}

TEST_CASE("two backward passes over one tape give identical gradients") {
    Rng rng(3);
    Tape tape;
    Tensor x = oracle::random_tensor(rng, {3, 4});
    Tensor w = oracle::random_tensor(rng, {4, 2});
    Tensor b = oracle::random_tensor(rng, {2});
    Tensor loss = ops::mean_all(tape, ops::abs(tape, ops::dense_affine(tape, x, w, b)));
    tape.backward(loss);
    const std::vector<double> g1(w.grad().begin(), w.grad().end());
    tape.backward(loss);
    const std::vector<double> g2(w.grad().begin(), w.grad().end());
    CHECK(g1 == g2);
}

TEST_CASE("tensors from another tape are rejected") {
    Tape a, b;
    Tensor x = Tensor::from({1}, {1});
    a.watch(x);
    CHECK_THROWS_AS(b.watch(x), std::invalid_argument);
}
