#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gpintent/factorization.hpp"
#include "gpintent/optimizer.hpp"
#include "gpintent/kernel.hpp"

namespace gpintent {

/// Training inputs (strictly increasing timestamps, seconds) and outputs.
class TrainingSet {
public:
    TrainingSet(std::vector<double> x, std::vector<double> y);

    std::span<const double> x() const { return x_; }
    std::span<const double> y() const { return y_; }
    Eigen::Map<const Eigen::VectorXd> y_vector() const {
        return {y_.data(), static_cast<Eigen::Index>(y_.size())};
    }
    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

/// A trained single-output GP. The factorization is shared between channels
/// fitted on the same inputs with the same hyperparameters.
struct FittedChannel {
    KernelParams params;
    std::shared_ptr<const TrainingSet> data;
    std::shared_ptr<const Factorization> factor;
    Eigen::VectorXd alpha;
};

FittedChannel fit(const TrainingSet& data, const KernelParams& p, const BackendConfig& backend);

/// Fit several output channels over the same inputs with one factorization.
std::vector<FittedChannel> fit_shared(std::span<const double> x, const std::vector<std::vector<double>>& ys,
                                      const KernelParams& p, const BackendConfig& backend);

double posterior_mean(const FittedChannel& ch, double x_star);
double posterior_var(const FittedChannel& ch, double x_star);
double log_marginal_likelihood(const FittedChannel& ch);

/// Posterior mean and variance at many queries; the OpenMP path partitions the
/// queries and matches reference::posterior_batch.
struct PosteriorBatch {
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
};
PosteriorBatch posterior_batch(const FittedChannel& ch, std::span<const double> queries);

namespace reference {
PosteriorBatch posterior_batch(const FittedChannel& ch, std::span<const double> queries);
}

/// Summed log marginal likelihood of the columns of `ys` (all sharing one
/// Gram matrix) and its gradient with respect to (log sigma_f, log l).
struct LikelihoodValue {
    double value = 0.0;
    Eigen::Vector2d grad_log = Eigen::Vector2d::Zero();
};
LikelihoodValue joint_log_likelihood(std::span<const double> x, const Eigen::MatrixXd& ys,
                                     const KernelParams& p, const BackendConfig& backend,
                                     bool with_gradient);

struct HyperBounds {
    double sigma_f_lo = 1e-3, sigma_f_hi = 1e3;
    double length_lo = 1e-3, length_hi = 1e3;
};

struct OptimizerOptions {
    int history = 10;
    int max_iterations = 50;
    double gradient_tolerance = 1e-6;
};

struct HyperResult {
    KernelParams params;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;  // false: best-so-far returned, treat as a warning
    std::vector<double> trace;  // LL at every accepted iterate
    CurvatureMemory memory;  // in (log sigma_f, log l), for warm-starting the next fit
};

/// Maximizes the (joint) log marginal likelihood over sigma_f and l in log
/// space; sigma_n is held at init.sigma_n.
HyperResult optimize_hyperparams(std::span<const double> x, const Eigen::MatrixXd& ys, const KernelParams& init,
                                 const HyperBounds& bounds, const BackendConfig& backend,
                                 const OptimizerOptions& opts = {}, const CurvatureMemory* seed = nullptr);

HyperResult optimize_hyperparams(const TrainingSet& data, const KernelParams& init, const HyperBounds& bounds,
                                 const BackendConfig& backend, const OptimizerOptions& opts = {});

} // namespace gpintent
