#include "gpintent/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gpintent/error.hpp"
#include "gpintent/optimizer.hpp"

namespace gpintent {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_query(double x_star) {
    if (!std::isfinite(x_star)) throw InvalidArgument("query input is not finite");
}

} // namespace

TrainingSet::TrainingSet(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty()) throw InvalidArgument("training set is empty");
    if (x_.size() != y_.size()) throw InvalidArgument("training inputs and outputs differ in length");
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw InvalidArgument("training data is not finite");
        if (i > 0 && !(x_[i] > x_[i - 1]))
            throw InvalidArgument("training inputs must be strictly increasing (duplicates rejected)");
    }
}

FittedChannel fit(const TrainingSet& data, const KernelParams& p, const BackendConfig& backend) {
    p.validate();
    auto f = std::make_shared<const Factorization>(factor(gram(data.x(), p), p.sigma_n, backend));
    FittedChannel ch{p, std::make_shared<const TrainingSet>(data), f, f->solve(Eigen::VectorXd(data.y_vector()))};
    return ch;
}

std::vector<FittedChannel> fit_shared(std::span<const double> x, const std::vector<std::vector<double>>& ys,
                                      const KernelParams& p, const BackendConfig& backend) {
    p.validate();
    std::vector<std::shared_ptr<const TrainingSet>> sets;
    sets.reserve(ys.size());
    for (const auto& y : ys)
        sets.push_back(std::make_shared<const TrainingSet>(std::vector<double>(x.begin(), x.end()), y));
    auto f = std::make_shared<const Factorization>(factor(gram(x, p), p.sigma_n, backend));
    const auto m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd rhs(m, static_cast<Eigen::Index>(ys.size()));
    for (std::size_t c = 0; c < ys.size(); ++c) rhs.col(static_cast<Eigen::Index>(c)) = sets[c]->y_vector();
    const Eigen::MatrixXd alpha = f->solve(rhs);
    std::vector<FittedChannel> out;
    out.reserve(ys.size());
    for (std::size_t c = 0; c < ys.size(); ++c)
        out.push_back({p, sets[c], f, alpha.col(static_cast<Eigen::Index>(c))});
    return out;
}

double posterior_mean(const FittedChannel& ch, double x_star) {
    check_query(x_star);
    const double q[1] = {x_star};
    const Eigen::MatrixXd ks = cross_covariance(ch.data->x(), q, ch.params);
    return ks.col(0).dot(ch.alpha);
}

double posterior_var(const FittedChannel& ch, double x_star) {
    check_query(x_star);
    const double q[1] = {x_star};
    const Eigen::VectorXd ks = cross_covariance(ch.data->x(), q, ch.params).col(0);
    const double prior = ch.params.sigma_f * ch.params.sigma_f;
    const double v = prior - ks.dot(ch.factor->solve(ks));
    return std::clamp(v, 0.0, prior);
}

double log_marginal_likelihood(const FittedChannel& ch) {
    const auto m = static_cast<double>(ch.data->size());
    return -0.5 * ch.data->y_vector().dot(ch.alpha) - 0.5 * ch.factor->logdet() - 0.5 * m * kLog2Pi;
}

PosteriorBatch posterior_batch(const FittedChannel& ch, std::span<const double> queries) {
    for (double q : queries) check_query(q);
    const auto nq = static_cast<Eigen::Index>(queries.size());
    const double prior = ch.params.sigma_f * ch.params.sigma_f;
    PosteriorBatch out{Eigen::VectorXd(nq), Eigen::VectorXd(nq)};
    constexpr Eigen::Index chunk = 64;
    const Eigen::Index chunks = (nq + chunk - 1) / chunk;
#pragma omp parallel for schedule(dynamic) if (chunks > 1)
    for (Eigen::Index c = 0; c < chunks; ++c) {
        const Eigen::Index begin = c * chunk;
        const Eigen::Index len = std::min(chunk, nq - begin);
        const Eigen::MatrixXd ks = cross_covariance(
            ch.data->x(), queries.subspan(static_cast<std::size_t>(begin), static_cast<std::size_t>(len)),
            ch.params);
        const Eigen::MatrixXd sol = ch.factor->solve(ks);
        out.mean.segment(begin, len) = ks.transpose() * ch.alpha;
        for (Eigen::Index j = 0; j < len; ++j)
            out.var[begin + j] = std::clamp(prior - ks.col(j).dot(sol.col(j)), 0.0, prior);
    }
    return out;
}

namespace reference {

PosteriorBatch posterior_batch(const FittedChannel& ch, std::span<const double> queries) {
    const auto nq = static_cast<Eigen::Index>(queries.size());
    PosteriorBatch out{Eigen::VectorXd(nq), Eigen::VectorXd(nq)};
    for (Eigen::Index j = 0; j < nq; ++j) {
        out.mean[j] = gpintent::posterior_mean(ch, queries[static_cast<std::size_t>(j)]);
        out.var[j] = gpintent::posterior_var(ch, queries[static_cast<std::size_t>(j)]);
    }
    return out;
}

} // namespace reference

LikelihoodValue joint_log_likelihood(std::span<const double> x, const Eigen::MatrixXd& ys,
                                     const KernelParams& p, const BackendConfig& backend,
                                     bool with_gradient) {
    const auto m = static_cast<Eigen::Index>(x.size());
    if (ys.rows() != m || ys.cols() == 0) throw InvalidArgument("outputs do not match inputs");
    const Factorization f = factor(gram(x, p), p.sigma_n, backend);
    const Eigen::MatrixXd alpha = f.solve(ys);
    const auto k = static_cast<double>(ys.cols());

    LikelihoodValue out;
    out.value = -0.5 * ys.cwiseProduct(alpha).sum() - 0.5 * k * f.logdet() -
                0.5 * k * static_cast<double>(m) * kLog2Pi;
    if (!with_gradient) return out;

    // d/dtheta = 1/2 sum_c a_c^T dK a_c - k/2 tr(A^-1 dK)
    // sigma_f: dK = 2 (A - sn^2 I), so a^T dK a = 2 (y^T a - sn^2 |a|^2).
    const Eigen::MatrixXd inv = f.inverse();
    const double sn2 = p.sigma_n * p.sigma_n;
    out.grad_log[0] = (ys.cwiseProduct(alpha).sum() - sn2 * alpha.squaredNorm()) -
                      k * (static_cast<double>(m) - sn2 * inv.trace());
    const double sf2 = p.sigma_f * p.sigma_f;
    const double inv_l = 1.0 / p.length_scale;
    double quad = 0.0, tr = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double r = kSqrt3 * std::abs(x[i] - x[j]) * inv_l;
            const double d = sf2 * r * r * std::exp(-r);
            quad += 2.0 * d * alpha.row(i).dot(alpha.row(j));
            tr += 2.0 * d * inv(i, j);
        }
    }
    out.grad_log[1] = 0.5 * quad - 0.5 * k * tr;
    return out;
}

HyperResult optimize_hyperparams(std::span<const double> x, const Eigen::MatrixXd& ys, const KernelParams& init,
                                 const HyperBounds& bounds, const BackendConfig& backend,
                                 const OptimizerOptions& opts, const CurvatureMemory* seed) {
    init.validate();
    const double b[4] = {bounds.sigma_f_lo, bounds.sigma_f_hi, bounds.length_lo, bounds.length_hi};
    for (double v : b)
        if (!std::isfinite(v) || v <= 0.0) throw InvalidArgument("hyperparameter bounds must be finite and positive");
    if (init.sigma_f < bounds.sigma_f_lo || init.sigma_f > bounds.sigma_f_hi || init.length_scale < bounds.length_lo ||
        init.length_scale > bounds.length_hi)
        throw InvalidArgument("initial hyperparameters lie outside the bounds");

    const Eigen::Vector2d lower(std::log(bounds.sigma_f_lo), std::log(bounds.length_lo));
    const Eigen::Vector2d upper(std::log(bounds.sigma_f_hi), std::log(bounds.length_hi));
    auto to_params = [&](const Eigen::VectorXd& theta) {
        KernelParams p = init;
        p.sigma_f = std::clamp(std::exp(theta[0]), bounds.sigma_f_lo, bounds.sigma_f_hi);
        p.length_scale = std::clamp(std::exp(theta[1]), bounds.length_lo, bounds.length_hi);
        return p;
    };

    bool first = true;
    Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
        const KernelParams p = to_params(theta);
        if (first) {
            // Failure at the starting point is the caller's problem.
            first = false;
            const LikelihoodValue lv = joint_log_likelihood(x, ys, p, backend, grad != nullptr);
            if (grad) *grad = -lv.grad_log;
            return -lv.value;
        }
        try {
            const LikelihoodValue lv = joint_log_likelihood(x, ys, p, backend, grad != nullptr);
            if (grad) *grad = -lv.grad_log;
            return -lv.value;
        } catch (const NumericalFailure&) {
            if (grad) grad->setZero();
            return std::numeric_limits<double>::infinity();
        }
    };

    BoundedLbfgsOptions lo;
    lo.history = opts.history;
    lo.max_iterations = opts.max_iterations;
    lo.gradient_tolerance = opts.gradient_tolerance;
    Eigen::VectorXd theta0(2);
    theta0 << std::log(init.sigma_f), std::log(init.length_scale);
    const BoundedLbfgsResult r = minimize_bounded(objective, theta0, lower, upper, lo, seed);

    HyperResult out;
    out.params = to_params(r.x);
    out.log_likelihood = -r.f;
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.memory = r.memory;
    out.trace.reserve(r.trace.size());
    for (double v : r.trace) out.trace.push_back(-v);
    return out;
}

HyperResult optimize_hyperparams(const TrainingSet& data, const KernelParams& init, const HyperBounds& bounds,
                                 const BackendConfig& backend, const OptimizerOptions& opts) {
    return optimize_hyperparams(data.x(), Eigen::MatrixXd(data.y_vector()), init, bounds, backend, opts);
}

} // namespace gpintent
