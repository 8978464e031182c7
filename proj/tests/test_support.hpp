#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace gpintent::testing {

inline std::vector<double> random_times(std::mt19937_64& rng, std::size_t m, double span) {
    std::uniform_real_distribution<double> u(0.0, span);
    std::vector<double> x(m);
    for (auto& v : x) v = u(rng);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

inline std::vector<double> uniform_times(std::size_t m, double dt) {
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = static_cast<double>(i) * dt;
    return x;
}

inline std::vector<double> gaussian(std::mt19937_64& rng, std::size_t m, double sd) {
    std::normal_distribution<double> n(0.0, sd);
    std::vector<double> y(m);
    for (auto& v : y) v = n(rng);
    return y;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(1e-300, b.norm());
}

} // namespace gpintent::testing
