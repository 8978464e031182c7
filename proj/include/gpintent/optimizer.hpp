#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace gpintent {

/// Objective returning f(x) and, when grad is non-null, writing df/dx into it.
/// May return +inf to signal an infeasible point; the line search then backtracks.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BoundedLbfgsOptions {
    int history = 10;
    int max_iterations = 50;
    double gradient_tolerance = 1e-6;  // on the infinity norm of the projected gradient
    double relative_reduction = 2.2e-9;  // stop when the relative decrease falls below this
    int max_line_search = 30;
    double armijo = 1e-4;
};

/// Curvature pairs (s, y) of a quasi-Newton run, oldest first. Seeding a
/// related problem with them skips the steepest-descent start.
struct CurvatureMemory {
    std::vector<Eigen::VectorXd> s;
    std::vector<Eigen::VectorXd> y;

    bool empty() const { return s.empty(); }
};

struct BoundedLbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;  // objective at the start point and every accepted iterate
    CurvatureMemory memory;
};

/// Limited-memory quasi-Newton minimization under box constraints.
///
/// Variables sitting on a bound with the gradient pushing outward are frozen
/// for the step; the two-loop recursion runs on the free set and the trial
/// point is projected back into the box. Every accepted iterate satisfies an
/// Armijo decrease, so the trace is non-increasing.
BoundedLbfgsResult minimize_bounded(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, const BoundedLbfgsOptions& opts = {},
                                    const CurvatureMemory* seed = nullptr);

} // namespace gpintent
