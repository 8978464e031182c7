#pragma once

#include <span>

#include <Eigen/Core>

namespace gpintent {

/// Matérn-3/2 hyperparameters. sigma_f is the signal amplitude, length_scale is
/// in seconds and sigma_n is the observation-noise standard deviation.
struct KernelParams {
    double sigma_f = 1.0;
    double length_scale = 0.5;
    double sigma_n = 0.003;

    void validate() const;
    bool operator==(const KernelParams&) const = default;
};

/// sigma_f^2 (1 + sqrt(3) d / l) exp(-sqrt(3) d / l), d = |xi - xj|.
double matern32(double xi, double xj, const KernelParams& p);

/// Derivatives of matern32 with respect to log(sigma_f) and log(l).
struct KernelGrad {
    double dlog_sigma_f;
    double dlog_length;
};
KernelGrad matern32_grad(double xi, double xj, const KernelParams& p);

/// Gram matrix K[i][j] = matern32(X[i], X[j]). Rows are filled in parallel
/// for large inputs; the result is bitwise identical to reference::gram.
Eigen::MatrixXd gram(std::span<const double> x, const KernelParams& p);

/// Cross covariance K(x, queries), size |x| x |queries|.
Eigen::MatrixXd cross_covariance(std::span<const double> x, std::span<const double> queries,
                                 const KernelParams& p);

/// Elementwise derivative matrices of the Gram in log-parameter space.
void gram_gradients(std::span<const double> x, const KernelParams& p, Eigen::MatrixXd& d_sigma,
                    Eigen::MatrixXd& d_length);

namespace reference {

/// Single-threaded Gram construction kept as the oracle for the OpenMP path.
Eigen::MatrixXd gram(std::span<const double> x, const KernelParams& p);

} // namespace reference

} // namespace gpintent
