#include "gpintent/kernel.hpp"

#include <cmath>
#include <string>

#include "gpintent/error.hpp"

namespace gpintent {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
// Below this many rows the OpenMP fork costs more than the fill.
constexpr Eigen::Index kParallelRows = 192;

inline double matern_at(double d, double sf2, double inv_l) {
    const double r = kSqrt3 * d * inv_l;
    return sf2 * (1.0 + r) * std::exp(-r);
}

void check_inputs(std::span<const double> x) {
    for (double v : x) {
        if (!std::isfinite(v)) throw InvalidArgument("kernel input is not finite");
    }
}

} // namespace

void KernelParams::validate() const {
    if (!std::isfinite(sigma_f) || !std::isfinite(length_scale) || !std::isfinite(sigma_n))
        throw InvalidArgument("kernel parameters must be finite");
    if (sigma_f <= 0.0) throw InvalidArgument("sigma_f must be positive");
    if (length_scale <= 0.0) throw InvalidArgument("length_scale must be positive");
    if (sigma_n < 0.0) throw InvalidArgument("sigma_n must be non-negative");
}

double matern32(double xi, double xj, const KernelParams& p) {
    if (!std::isfinite(xi) || !std::isfinite(xj)) throw InvalidArgument("kernel input is not finite");
    p.validate();
    return matern_at(std::abs(xi - xj), p.sigma_f * p.sigma_f, 1.0 / p.length_scale);
}

KernelGrad matern32_grad(double xi, double xj, const KernelParams& p) {
    if (!std::isfinite(xi) || !std::isfinite(xj)) throw InvalidArgument("kernel input is not finite");
    p.validate();
    const double sf2 = p.sigma_f * p.sigma_f;
    const double r = kSqrt3 * std::abs(xi - xj) / p.length_scale;
    const double e = std::exp(-r);
    return {2.0 * sf2 * (1.0 + r) * e, sf2 * r * r * e};
}

Eigen::MatrixXd gram(std::span<const double> x, const KernelParams& p) {
    check_inputs(x);
    p.validate();
    const auto m = static_cast<Eigen::Index>(x.size());
    const double sf2 = p.sigma_f * p.sigma_f;
    const double inv_l = 1.0 / p.length_scale;
    Eigen::MatrixXd k(m, m);
    // Column-major: fill the lower triangle column by column, then mirror.
#pragma omp parallel for schedule(dynamic, 16) if (m >= kParallelRows)
    for (Eigen::Index j = 0; j < m; ++j) {
        k(j, j) = sf2;
        for (Eigen::Index i = j + 1; i < m; ++i) k(i, j) = matern_at(std::abs(x[i] - x[j]), sf2, inv_l);
    }
    k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
    return k;
}

Eigen::MatrixXd cross_covariance(std::span<const double> x, std::span<const double> queries,
                                 const KernelParams& p) {
    check_inputs(x);
    check_inputs(queries);
    p.validate();
    const auto m = static_cast<Eigen::Index>(x.size());
    const auto q = static_cast<Eigen::Index>(queries.size());
    const double sf2 = p.sigma_f * p.sigma_f;
    const double inv_l = 1.0 / p.length_scale;
    Eigen::MatrixXd k(m, q);
#pragma omp parallel for schedule(static) if (q * m >= kParallelRows * kParallelRows)
    for (Eigen::Index j = 0; j < q; ++j)
        for (Eigen::Index i = 0; i < m; ++i) k(i, j) = matern_at(std::abs(x[i] - queries[j]), sf2, inv_l);
    return k;
}

void gram_gradients(std::span<const double> x, const KernelParams& p, Eigen::MatrixXd& d_sigma,
                    Eigen::MatrixXd& d_length) {
    check_inputs(x);
    p.validate();
    const auto m = static_cast<Eigen::Index>(x.size());
    const double sf2 = p.sigma_f * p.sigma_f;
    const double inv_l = 1.0 / p.length_scale;
    d_sigma.resize(m, m);
    d_length.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        d_sigma(j, j) = 2.0 * sf2;
        d_length(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double r = kSqrt3 * std::abs(x[i] - x[j]) * inv_l;
            const double e = std::exp(-r);
            d_sigma(i, j) = d_sigma(j, i) = 2.0 * sf2 * (1.0 + r) * e;
            d_length(i, j) = d_length(j, i) = sf2 * r * r * e;
        }
    }
}

namespace reference {

Eigen::MatrixXd gram(std::span<const double> x, const KernelParams& p) {
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) k(i, j) = matern32(x[i], x[j], p);
    return k;
}

} // namespace reference

} // namespace gpintent
