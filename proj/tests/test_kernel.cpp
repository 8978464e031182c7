#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "gpintent/error.hpp"
#include "gpintent/kernel.hpp"
#include "test_support.hpp"

using namespace gpintent;

TEST_CASE("matern32 scalar values") {
    const KernelParams unit{1.0, 1.0, 0.0};
    CHECK(matern32(0.3, 0.3, unit) == 1.0);
    // (1 + sqrt 3) exp(-sqrt 3)
    CHECK(matern32(0.0, 1.0, unit) == doctest::Approx(0.4833577245965077).epsilon(1e-14));
    CHECK(matern32(0.0, 0.1, KernelParams{1.0, 0.5, 0.0}) == doctest::Approx(0.9522113614772348).epsilon(1e-14));
    CHECK(matern32(2.0, 2.0, KernelParams{2.0, 0.7, 0.0}) == 4.0);
}

TEST_CASE("matern32 rejects bad input") {
    const KernelParams p{};
    CHECK_THROWS_AS(matern32(std::nan(""), 0.0, p), InvalidArgument);
    CHECK_THROWS_AS(matern32(0.0, std::numeric_limits<double>::infinity(), p), InvalidArgument);
    CHECK_THROWS_AS(matern32(0.0, 1.0, KernelParams{0.0, 1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(matern32(0.0, 1.0, KernelParams{1.0, -1.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS(matern32(0.0, 1.0, KernelParams{1.0, 1.0, -0.1}), InvalidArgument);
}

TEST_CASE("gram examples") {
    const double x1[] = {0.0};
    const Eigen::MatrixXd k1 = gram(x1, KernelParams{2.0, 1.0, 0.0});
    CHECK(k1.rows() == 1);
    CHECK(k1(0, 0) == 4.0);

    const double x2[] = {0.0, 1.0};
    const Eigen::MatrixXd k2 = gram(x2, KernelParams{1.0, 1.0, 0.0});
    CHECK(k2(0, 0) == 1.0);
    CHECK(k2(1, 1) == 1.0);
    CHECK(k2(0, 1) == doctest::Approx(0.4833577245965077).epsilon(1e-14));
    CHECK(k2(0, 1) == k2(1, 0));
}

TEST_CASE("kernel symmetry, range and Gram PSD over seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-5.0, 5.0), pos(0.05, 3.0);
        const KernelParams p{pos(rng), pos(rng), 0.0};
        for (int i = 0; i < 50; ++i) {
            const double a = u(rng), b = u(rng);
            const double kab = matern32(a, b, p);
            CHECK(kab == matern32(b, a, p));
            CHECK(kab > 0.0);
            CHECK(kab <= p.sigma_f * p.sigma_f);
        }
        const auto x = testing::random_times(rng, 40, 4.0);
        const Eigen::MatrixXd k = gram(x, p);
        CHECK(k == k.transpose());
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += 1e-10;
        const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kj).eigenvalues().minCoeff();
        CHECK(min_eig >= -1e-10);
    }
}

TEST_CASE("parallel gram matches serial reference bit for bit") {
    std::mt19937_64 rng(7);
    for (std::size_t m : {1u, 17u, 191u, 192u, 600u}) {
        const auto x = testing::random_times(rng, m, 10.0);
        const KernelParams p{1.3, 0.4, 0.0};
        CHECK(gram(x, p) == reference::gram(x, p));
    }
}

TEST_CASE("analytic kernel derivatives match central differences") {
    const KernelParams p{1.7, 0.35, 0.0};
    const double h = 1e-6;
    for (double d : {0.0, 0.05, 0.3, 1.2}) {
        const KernelGrad g = matern32_grad(0.0, d, p);
        KernelParams ps = p, ms = p;
        ps.sigma_f *= std::exp(h);
        ms.sigma_f *= std::exp(-h);
        CHECK(g.dlog_sigma_f == doctest::Approx((matern32(0, d, ps) - matern32(0, d, ms)) / (2 * h)).epsilon(1e-7));
        KernelParams pl = p, ml = p;
        pl.length_scale *= std::exp(h);
        ml.length_scale *= std::exp(-h);
        CHECK(g.dlog_length ==
              doctest::Approx((matern32(0, d, pl) - matern32(0, d, ml)) / (2 * h)).epsilon(1e-6).scale(1e-9));
    }
}
