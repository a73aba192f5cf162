#include <doctest.h>

#include <cstring>
#include <vector>

#include "oracles.hpp"
#include "stef/common.hpp"
#include "stef/kernels.hpp"

using namespace stef;
namespace kn = stef::kernels;

namespace {

std::vector<double> rand_vec(Rng& rng, int64_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("kernel dispatch resolves") {
    CHECK(kn::active().name != nullptr);
    CHECK(kn::table(kn::Isa::scalar).name == std::string("scalar"));
}

TEST_CASE("scalar and avx2 kernels are bit-identical") {
    if (!kn::avx2_available()) {
        MESSAGE("avx2 not available on this CPU; equivalence suite skipped");
        return;
    }
    const kn::KernelTable& s = kn::table(kn::Isa::scalar);
    const kn::KernelTable& v = kn::table(kn::Isa::avx2);
    Rng rng(20240811);

    SUBCASE("matmul_acc") {
        for (auto [M, K, N] : {std::tuple<int64_t, int64_t, int64_t>{1, 1, 1},
                               {3, 7, 5},
                               {4, 17, 16},
                               {9, 33, 37},
                               {2, 8, 64}}) {
            const auto a = rand_vec(rng, M * K);
            const auto b = rand_vec(rng, K * N);
            auto c1 = rand_vec(rng, M * N);
            auto c2 = c1;
            s.matmul_acc(c1.data(), a.data(), b.data(), 0, M, K, N);
            v.matmul_acc(c2.data(), a.data(), b.data(), 0, M, K, N);
            CHECK(bit_equal(c1, c2));
        }
    }

    SUBCASE("conv3x3_acc and wgrad") {
        for (auto [B, W, H, cin, cout] : {std::tuple<int64_t, int64_t, int64_t, int64_t, int64_t>{
                                              1, 3, 3, 1, 1},
                                          {2, 5, 4, 3, 8},
                                          {1, 8, 8, 32, 32},
                                          {3, 4, 7, 2, 5},
                                          {2, 6, 5, 4, 19}}) {
            const auto in = rand_vec(rng, B * W * H * cin);
            const auto k = rand_vec(rng, 9 * cin * cout);
            auto o1 = rand_vec(rng, B * W * H * cout);
            auto o2 = o1;
            s.conv3x3_acc(o1.data(), in.data(), k.data(), 0, B, W, H, cin, cout);
            v.conv3x3_acc(o2.data(), in.data(), k.data(), 0, B, W, H, cin, cout);
            CHECK(bit_equal(o1, o2));

            const auto dout = rand_vec(rng, B * W * H * cout);
            auto dk1 = rand_vec(rng, 9 * cin * cout);
            auto dk2 = dk1;
            s.conv3x3_wgrad_acc(dk1.data(), in.data(), dout.data(), B, W, H, cin, cout);
            v.conv3x3_wgrad_acc(dk2.data(), in.data(), dout.data(), B, W, H, cin, cout);
            CHECK(bit_equal(dk1, dk2));
        }
    }

    SUBCASE("elementwise and reductions") {
        for (int64_t n : {1, 3, 4, 17, 127, 1024}) {
            const auto a = rand_vec(rng, n);
            const auto b = rand_vec(rng, n);
            std::vector<double> r1(static_cast<size_t>(n)), r2(static_cast<size_t>(n));

            s.add(r1.data(), a.data(), b.data(), n);
            v.add(r2.data(), a.data(), b.data(), n);
            CHECK(bit_equal(r1, r2));
            s.sub(r1.data(), a.data(), b.data(), n);
            v.sub(r2.data(), a.data(), b.data(), n);
            CHECK(bit_equal(r1, r2));
            s.mul(r1.data(), a.data(), b.data(), n);
            v.mul(r2.data(), a.data(), b.data(), n);
            CHECK(bit_equal(r1, r2));
            s.relu(r1.data(), a.data(), n);
            v.relu(r2.data(), a.data(), n);
            CHECK(bit_equal(r1, r2));

            auto y1 = rand_vec(rng, n);
            auto y2 = y1;
            s.axpy(y1.data(), 0.37, a.data(), n);
            v.axpy(y2.data(), 0.37, a.data(), n);
            CHECK(bit_equal(y1, y2));

            auto d1 = rand_vec(rng, n);
            auto d2 = d1;
            s.relu_bwd_acc(d1.data(), a.data(), b.data(), n);
            v.relu_bwd_acc(d2.data(), a.data(), b.data(), n);
            CHECK(bit_equal(d1, d2));
        }
        const int64_t rows = 13, cols = 21;
        const auto x = rand_vec(rng, rows * cols);
        auto a1 = rand_vec(rng, cols);
        auto a2 = a1;
        s.col_sum_acc(a1.data(), x.data(), rows, cols);
        v.col_sum_acc(a2.data(), x.data(), rows, cols);
        CHECK(bit_equal(a1, a2));
    }

    SUBCASE("bn_apply") {
        const int64_t rows = 9, C = 11;
        const auto x = rand_vec(rng, rows * C);
        const auto sc = rand_vec(rng, C, 0.5, 2.0);
        const auto sh = rand_vec(rng, C);
        const auto g = rand_vec(rng, C);
        const auto be = rand_vec(rng, C);
        std::vector<double> y1(static_cast<size_t>(rows * C)), y2 = y1;
        std::vector<double> xh1(static_cast<size_t>(rows * C)), xh2 = xh1;
        s.bn_apply(y1.data(), xh1.data(), x.data(), sc.data(), sh.data(), g.data(), be.data(),
                   rows, C);
        v.bn_apply(y2.data(), xh2.data(), x.data(), sc.data(), sh.data(), g.data(), be.data(),
                   rows, C);
        CHECK(bit_equal(y1, y2));
        CHECK(bit_equal(xh1, xh2));
    }

    SUBCASE("adam_step") {
        for (int64_t n : {1, 5, 64, 201}) {
            const auto g = rand_vec(rng, n);
            auto p1 = rand_vec(rng, n);
            auto p2 = p1;
            auto m1 = rand_vec(rng, n, 0.0, 0.1);
            auto m2 = m1;
            auto v1 = rand_vec(rng, n, 0.0, 0.1);
            auto v2 = v1;
            s.adam_step(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-3, 0.9, 0.999, 1e-8,
                        0.1, 0.001999);
            v.adam_step(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-3, 0.9, 0.999, 1e-8,
                        0.1, 0.001999);
            CHECK(bit_equal(p1, p2));
            CHECK(bit_equal(m1, m2));
            CHECK(bit_equal(v1, v2));
        }
    }
}

TEST_CASE("conv3x3_acc matches the naive-loop oracle") {
    Rng rng(7);
    for (int iter = 0; iter < 20; ++iter) {
        const int64_t B = 1 + rng.uniform_int(3);
        const int64_t W = 2 + rng.uniform_int(6);
        const int64_t H = 2 + rng.uniform_int(6);
        const int64_t cin = 1 + rng.uniform_int(4);
        const int64_t cout = 1 + rng.uniform_int(6);
        const auto in = rand_vec(rng, B * W * H * cin);
        const auto k = rand_vec(rng, 9 * cin * cout);
        const auto bias = rand_vec(rng, cout);

        std::vector<double> out(static_cast<size_t>(B * W * H * cout));
        for (int64_t p = 0; p < B * W * H; ++p)
            std::memcpy(out.data() + p * cout, bias.data(), sizeof(double) * static_cast<size_t>(cout));
        kn::active().conv3x3_acc(out.data(), in.data(), k.data(), 0, B, W, H, cin, cout);

        const auto want = oracle::conv2d_same(in, B, W, H, cin, k, cout, bias);
        for (size_t i = 0; i < out.size(); ++i)
            CHECK(out[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("parallel_rows covers every row exactly once") {
    std::vector<int> hits(1037, 0);
    kn::parallel_rows(1037, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) hits[static_cast<size_t>(i)]++;
    });
    for (int h : hits) CHECK(h == 1);
}
