#include "gpintent/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "gpintent/error.hpp"

namespace gpintent {

namespace {

struct Pair {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

} // namespace

BoundedLbfgsResult minimize_bounded(const Objective& fun, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, const BoundedLbfgsOptions& opts,
                                    const CurvatureMemory* seed) {
    const Eigen::Index n = x0.size();
    if (lower.size() != n || upper.size() != n) throw InvalidArgument("bounds have the wrong dimension");
    if ((lower.array() > upper.array()).any()) throw InvalidArgument("lower bound exceeds upper bound");
    if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("bounds must be finite");

    BoundedLbfgsResult res;
    Eigen::VectorXd x = project(x0, lower, upper);
    Eigen::VectorXd g(n);
    double f = fun(x, &g);
    res.x = x;
    res.f = f;
    if (!std::isfinite(f)) return res;
    res.trace.push_back(f);

    std::deque<Pair> memory;
    if (seed) {
        if (seed->s.size() != seed->y.size()) throw InvalidArgument("curvature memory is inconsistent");
        for (std::size_t k = 0; k < seed->s.size(); ++k) {
            if (seed->s[k].size() != n || seed->y[k].size() != n) throw InvalidArgument("curvature memory has the wrong dimension");
            const double sy = seed->s[k].dot(seed->y[k]);
            if (sy > 1e-12 * seed->y[k].squaredNorm() && sy > 0.0) memory.push_back({seed->s[k], seed->y[k], 1.0 / sy});
        }
        while (static_cast<int>(memory.size()) > opts.history) memory.pop_front();
    }
    Eigen::VectorXd gt(n);
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        const Eigen::VectorXd pg = project(x - g, lower, upper) - x;
        if (pg.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd free = Eigen::VectorXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) free[i] = 0.0;
        }
        const Eigen::VectorXd gf = g.cwiseProduct(free);

        Eigen::VectorXd d;
        if (memory.empty()) {
            d = -gf / std::max(1.0, gf.lpNorm<Eigen::Infinity>());
        } else {
            // Two-loop recursion restricted to the free variables.
            Eigen::VectorXd q = gf;
            std::vector<double> a(memory.size());
            for (std::size_t k = memory.size(); k-- > 0;) {
                a[k] = memory[k].rho * memory[k].s.cwiseProduct(free).dot(q);
                q -= a[k] * memory[k].y.cwiseProduct(free);
            }
            const Pair& last = memory.back();
            q *= last.s.dot(last.y) / last.y.squaredNorm();
            for (std::size_t k = 0; k < memory.size(); ++k) {
                const double b = memory[k].rho * memory[k].y.cwiseProduct(free).dot(q);
                q += (a[k] - b) * memory[k].s.cwiseProduct(free);
            }
            d = -q.cwiseProduct(free);
            if (g.dot(d) >= 0.0) {
                memory.clear();
                d = -gf / std::max(1.0, gf.lpNorm<Eigen::Infinity>());
            }
        }

        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd xt;
        double ft = 0.0;
        for (int ls = 0; ls < opts.max_line_search; ++ls, t *= 0.5) {
            xt = project(x + t * d, lower, upper);
            if ((xt - x).lpNorm<Eigen::Infinity>() == 0.0) break;
            // Predicted decrease already below the reduction tolerance: stationary.
            if (-g.dot(xt - x) <= opts.relative_reduction * std::max(std::abs(f), 1.0)) {
                res.converged = true;
                break;
            }
            ft = fun(xt, nullptr);
            if (std::isfinite(ft) && ft <= f + opts.armijo * g.dot(xt - x)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        ft = fun(xt, &gt);
        if (!std::isfinite(ft)) break;

        Pair p{xt - x, gt - g, 0.0};
        const double sy = p.s.dot(p.y);
        if (sy > 1e-12 * p.y.squaredNorm() && sy > 0.0) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (static_cast<int>(memory.size()) > opts.history) memory.pop_front();
        }

        const double rel = (f - ft) / std::max({std::abs(f), std::abs(ft), 1.0});
        x = xt;
        f = ft;
        g = gt;
        res.trace.push_back(f);
        res.iterations = iter + 1;
        if (rel <= opts.relative_reduction) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.f = f;
    for (const Pair& p : memory) {
        res.memory.s.push_back(p.s);
        res.memory.y.push_back(p.y);
    }
    return res;
}

} // namespace gpintent
