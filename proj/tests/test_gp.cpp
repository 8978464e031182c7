#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "gpintent/error.hpp"
#include "gpintent/gp.hpp"
#include "test_support.hpp"

using namespace gpintent;

namespace {

struct DenseOracle {
    double mean;
    double var;
};

// Posterior through an explicit inverse, independent of the factorization code.
DenseOracle oracle(const std::vector<double>& x, const std::vector<double>& y, const KernelParams& p, double xs) {
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd ks(m), yv(m);
    const double sf2 = p.sigma_f * p.sigma_f;
    auto k = [&](double d) {
        const double r = std::sqrt(3.0) * std::abs(d) / p.length_scale;
        return sf2 * (1.0 + r) * std::exp(-r);
    };
    for (Eigen::Index i = 0; i < m; ++i) {
        yv[i] = y[static_cast<std::size_t>(i)];
        ks[i] = k(x[static_cast<std::size_t>(i)] - xs);
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = k(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
    }
    a.diagonal().array() += p.sigma_n * p.sigma_n;
    const Eigen::MatrixXd inv = a.fullPivLu().inverse();
    return {ks.dot(inv * yv), sf2 - ks.dot(inv * ks)};
}

} // namespace

TEST_CASE("training set validation") {
    CHECK_THROWS_AS(TrainingSet({}, {}), InvalidArgument);
    CHECK_THROWS_AS(TrainingSet({0.0, 1.0}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(TrainingSet({0.0, 0.0}, {1.0, 2.0}), InvalidArgument);
    CHECK_THROWS_AS(TrainingSet({1.0, 0.0}, {1.0, 2.0}), InvalidArgument);
    CHECK_NOTHROW(TrainingSet({0.0}, {1.0}));
}

TEST_CASE("fit examples") {
    const KernelParams p{1.5, 1.0, 0.0};
    const FittedChannel ch = fit(TrainingSet({0.0}, {2.0}), p, BackendConfig::dense());
    CHECK(ch.alpha.size() == 1);
    CHECK(ch.alpha[0] == doctest::Approx(2.0 / (1.5 * 1.5)).epsilon(1e-14));

    const FittedChannel zeros = fit(TrainingSet({0.0, 0.1, 0.2}, {0.0, 0.0, 0.0}), p, BackendConfig::hodlr());
    CHECK(zeros.alpha.isZero(0.0));
}

TEST_CASE("posterior examples") {
    const KernelParams unit{1.0, 1.0, 0.0};
    const FittedChannel one = fit(TrainingSet({0.0}, {1.0}), unit, BackendConfig::dense());
    CHECK(posterior_mean(one, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(posterior_var(one, 0.0) == doctest::Approx(0.0).scale(1.0));
    // Far from the data the zero-mean prior takes over.
    CHECK(std::abs(posterior_mean(one, 31.0)) < 1e-6);
    CHECK(posterior_var(one, 31.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(posterior_mean(one, std::nan("")), InvalidArgument);
    CHECK_THROWS_AS(posterior_var(one, INFINITY), InvalidArgument);

    // Two-point set against a closed-form 2x2 solve.
    const FittedChannel two = fit(TrainingSet({0.0, 1.0}, {1.0, -1.0}), unit, BackendConfig::dense());
    const double k01 = (1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0));
    const double r = std::sqrt(3.0) * 0.5;
    const double ka = (1.0 + r) * std::exp(-r);
    // K^-1 = [[1,-k],[-k,1]] / (1 - k^2); y = (1,-1); k* = (ka, ka)
    const double mean = (ka * (1.0 + k01) - ka * (1.0 + k01)) / (1.0 - k01 * k01);
    const double var = 1.0 - 2.0 * ka * ka * (1.0 - k01) / (1.0 - k01 * k01);
    CHECK(posterior_mean(two, 0.5) == doctest::Approx(mean).scale(1.0).epsilon(1e-12));
    CHECK(posterior_var(two, 0.5) == doctest::Approx(var).epsilon(1e-10));
    CHECK(posterior_mean(two, 0.25) == doctest::Approx(oracle({0.0, 1.0}, {1.0, -1.0}, unit, 0.25).mean).epsilon(1e-12));
}

TEST_CASE("log marginal likelihood examples") {
    const KernelParams unit{1.0, 1.0, 0.0};
    CHECK(log_marginal_likelihood(fit(TrainingSet({0.0}, {0.0}), unit, BackendConfig::dense())) ==
          doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(log_marginal_likelihood(fit(TrainingSet({0.0}, {1.0}), unit, BackendConfig::dense())) ==
          doctest::Approx(-0.5 - 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("dense posterior matches explicit-inverse oracle over 200 random problems") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> msize(1, 64);
    std::uniform_real_distribution<double> sf(0.3, 2.0), ls(0.1, 1.5), sn(0.02, 0.3), q(-0.5, 3.5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = testing::random_times(rng, static_cast<std::size_t>(msize(rng)), 3.0);
        const auto y = testing::gaussian(rng, x.size(), 1.0);
        const KernelParams p{sf(rng), ls(rng), sn(rng)};
        const FittedChannel ch = fit(TrainingSet(x, y), p, BackendConfig::dense());
        const double xs = q(rng);
        const DenseOracle o = oracle(x, y, p, xs);
        CHECK(testing::rel_err(posterior_mean(ch, xs), o.mean) < 1e-10);
        CHECK(testing::rel_err(posterior_var(ch, xs), std::clamp(o.var, 0.0, p.sigma_f * p.sigma_f)) < 1e-10);
    }
}

TEST_CASE("interpolation and variance bounds over seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> sf(0.5, 2.0), ls(0.05, 0.5), q(-1.0, 4.0);
        const auto x = testing::random_times(rng, 30, 3.0);
        const auto y = testing::gaussian(rng, x.size(), 1.0);
        const KernelParams p{sf(rng), ls(rng), 0.0};
        for (const auto& cfg : {BackendConfig::dense(), BackendConfig::hodlr(1e-8, 8)}) {
            const FittedChannel ch = fit(TrainingSet(x, y), p, cfg);
            for (std::size_t i = 0; i < x.size(); ++i) {
                CHECK(std::abs(posterior_mean(ch, x[i]) - y[i]) <= 1e-8 * std::max(1.0, std::abs(y[i])));
                CHECK(posterior_var(ch, x[i]) <= 1e-8);
            }
            for (int k = 0; k < 20; ++k) {
                const double v = posterior_var(ch, q(rng));
                CHECK(v >= 0.0);
                CHECK(v <= p.sigma_f * p.sigma_f + 1e-12);
            }
        }
    }
}

TEST_CASE("backend equivalence up to m = 512") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t m = 32 + (seed * 97) % 481;
        const auto x = testing::uniform_times(m, 1.0 / 34.0);
        std::vector<double> y(m);
        std::normal_distribution<double> n(0.0, 0.003);
        for (std::size_t i = 0; i < m; ++i) y[i] = 0.4 * std::sin(1.3 * x[i]) + 0.2 + n(rng);
        const KernelParams p{0.5, 0.6, 0.003};
        const FittedChannel d = fit(TrainingSet(x, y), p, BackendConfig::dense());
        const FittedChannel h = fit(TrainingSet(x, y), p, BackendConfig::hodlr(1e-8, 32));
        CHECK(std::abs(log_marginal_likelihood(d) - log_marginal_likelihood(h)) < 1e-5);
        for (double xs : {x.front(), x[m / 3], x.back() + 0.3, x.back() / 2 + 0.01}) {
            CHECK(std::abs(posterior_mean(d, xs) - posterior_mean(h, xs)) < 1e-6);
            CHECK(std::abs(posterior_var(d, xs) - posterior_var(h, xs)) < 1e-6);
        }
    }
}

TEST_CASE("parallel batch posterior matches serial reference") {
    std::mt19937_64 rng(3);
    const auto x = testing::uniform_times(150, 1.0 / 34.0);
    const auto y = testing::gaussian(rng, x.size(), 0.5);
    const FittedChannel ch = fit(TrainingSet(x, y), KernelParams{1.0, 0.4, 0.01}, BackendConfig::hodlr());
    std::vector<double> qs = testing::random_times(rng, 500, 6.0);
    const PosteriorBatch par = posterior_batch(ch, qs);
    const PosteriorBatch ser = reference::posterior_batch(ch, qs);
    CHECK((par.mean - ser.mean).lpNorm<Eigen::Infinity>() < 1e-12 * ch.alpha.lpNorm<1>());
    CHECK((par.var - ser.var).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("fit_shared channels share one factorization") {
    const auto x = testing::uniform_times(20, 0.05);
    std::vector<double> a(20), b(20);
    for (std::size_t i = 0; i < 20; ++i) {
        a[i] = std::sin(x[i]);
        b[i] = std::cos(x[i]);
    }
    const KernelParams p{1.0, 0.5, 0.003};
    const auto chs = fit_shared(x, {a, b}, p, BackendConfig::dense());
    REQUIRE(chs.size() == 2);
    CHECK(chs[0].factor == chs[1].factor);
    const FittedChannel solo = fit(TrainingSet(x, b), p, BackendConfig::dense());
    CHECK((chs[1].alpha - solo.alpha).norm() < 1e-9 * solo.alpha.norm());
}
