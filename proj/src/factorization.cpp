#include "gpintent/factorization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "gpintent/error.hpp"

namespace gpintent {

std::string_view to_string(Backend b) {
    return b == Backend::Dense ? "dense" : "hodlr";
}

// ---- dense -----------------------------------------------------------------

DenseFactor::DenseFactor(const Eigen::MatrixXd& a) : llt_(a) {
    ok_ = llt_.info() == Eigen::Success;
    if (ok_) {
        logdet_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
        ok_ = std::isfinite(logdet_);
    }
}

void DenseFactor::solve_in_place(Eigen::Ref<Eigen::MatrixXd> b) const {
    llt_.solveInPlace(b);
}

Eigen::MatrixXd DenseFactor::inverse() const {
    return llt_.solve(Eigen::MatrixXd::Identity(llt_.rows(), llt_.rows()));
}

// ---- hierarchical ----------------------------------------------------------

void compress_block(const Eigen::Ref<const Eigen::MatrixXd>& block, double tol, Eigen::MatrixXd& u,
                    Eigen::MatrixXd& v) {
    const Eigen::Index rows = block.rows();
    const Eigen::Index cols = block.cols();
    const Eigen::Index max_rank = std::min(rows, cols);
    u.resize(rows, max_rank);
    v.resize(cols, max_rank);
    Eigen::MatrixXd residual = block;
    const double norm = residual.norm();
    Eigen::Index rank = 0;
    if (norm > 0.0) {
        while (rank < max_rank) {
            Eigen::Index i = 0, j = 0;
            const double pivot = residual.cwiseAbs().maxCoeff(&i, &j);
            if (pivot == 0.0) break;
            u.col(rank) = residual.col(j);
            v.col(rank) = residual.row(i).transpose() / residual(i, j);
            residual.noalias() -= u.col(rank) * v.col(rank).transpose();
            ++rank;
            if (residual.norm() <= tol * norm) break;
        }
    }
    u.conservativeResize(rows, rank);
    v.conservativeResize(cols, rank);
}

HodlrFactor::HodlrFactor(const Eigen::MatrixXd& a, double tolerance, int leaf_size)
    : tolerance_(tolerance), leaf_size_(std::max(leaf_size, 1)) {
    if (a.rows() != a.cols()) throw InvalidArgument("HODLR factorization needs a square matrix");
    if (a.rows() == 0) throw InvalidArgument("HODLR factorization of an empty matrix");
    build(a, 0, a.rows(), 0);
    ok_ = ok_ && std::isfinite(logdet_);
}

int HodlrFactor::build(const Eigen::MatrixXd& a, Eigen::Index begin, Eigen::Index size, int depth) {
    const int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[idx].begin = begin;
    nodes_[idx].size = size;
    nodes_[idx].depth = depth;

    if (size <= leaf_size_) {
        Node& node = nodes_[idx];
        node.leaf.compute(a.block(begin, begin, size, size));
        if (node.leaf.info() != Eigen::Success) {
            ok_ = false;
        } else {
            logdet_ += 2.0 * node.leaf.matrixLLT().diagonal().array().log().sum();
        }
        return idx;
    }

    const Eigen::Index n1 = size / 2;
    const Eigen::Index n2 = size - n1;
    const int left = build(a, begin, n1, depth + 1);
    const int right = build(a, begin + n1, n2, depth + 1);
    Node& node = nodes_[idx];
    node.left = left;
    node.right = right;
    if (!ok_) return idx;

    compress_block(a.block(begin, begin + n1, n1, n2), tolerance_, node.u, node.v);
    const Eigen::Index r = node.u.cols();
    node.rank = r;
    if (r == 0) return idx;

    node.w_left = node.u;
    solve_node(left, node.w_left);
    node.w_right = node.v;
    solve_node(right, node.w_right);

    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * r, 2 * r);
    s.topRightCorner(r, r).noalias() = node.v.transpose() * node.w_right;
    s.bottomLeftCorner(r, r).noalias() = node.u.transpose() * node.w_left;
    node.coupling.compute(s);
    const double det = node.coupling.determinant();
    // det(I + Q^T W) = det(A) / (det(A11) det(A22)) is positive iff A is.
    if (!(det > 0.0) || !std::isfinite(det)) {
        ok_ = false;
    } else {
        logdet_ += std::log(det);
    }
    return idx;
}

void HodlrFactor::solve_node(int idx, Eigen::Ref<Eigen::MatrixXd> b) const {
    const Node& node = nodes_[idx];
    if (node.left < 0) {
        node.leaf.solveInPlace(b);
        return;
    }
    const Eigen::Index n1 = nodes_[node.left].size;
    const Eigen::Index n2 = nodes_[node.right].size;
    solve_node(node.left, b.topRows(n1));
    solve_node(node.right, b.bottomRows(n2));
    const Eigen::Index r = node.rank;
    if (r == 0) return;
    Eigen::MatrixXd q(2 * r, b.cols());
    q.topRows(r).noalias() = node.v.transpose() * b.bottomRows(n2);
    q.bottomRows(r).noalias() = node.u.transpose() * b.topRows(n1);
    const Eigen::MatrixXd y = node.coupling.solve(q);
    b.topRows(n1).noalias() -= node.w_left * y.topRows(r);
    b.bottomRows(n2).noalias() -= node.w_right * y.bottomRows(r);
}

void HodlrFactor::solve_in_place(Eigen::Ref<Eigen::MatrixXd> b) const {
    if (b.rows() != nodes_.front().size) throw InvalidArgument("right-hand side has the wrong size");
    solve_node(0, b);
}

int HodlrFactor::max_rank() const {
    Eigen::Index r = 0;
    for (const auto& n : nodes_) r = std::max(r, n.rank);
    return static_cast<int>(r);
}

int HodlrFactor::levels() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d + 1;
}

void HodlrFactor::describe(std::ostream& os) const {
    fmt::print(os, "# hodlr tol={} leaf={} levels={} logdet={:.17g}\n", tolerance_, leaf_size_, levels(),
               logdet_);
    for (const auto& n : nodes_) {
        fmt::print(os, "node depth={} begin={} size={} {}\n", n.depth, n.begin, n.size,
                   n.left < 0 ? std::string("leaf") : fmt::format("rank={}", n.rank));
    }
}

// ---- facade ----------------------------------------------------------------

Factorization::Factorization(std::variant<DenseFactor, HodlrFactor> impl, BackendConfig cfg, double jitter)
    : impl_(std::move(impl)), cfg_(cfg), jitter_(jitter), size_(0) {
    size_ = std::visit([](const auto& f) { return f.size(); }, impl_);
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const {
    Eigen::MatrixXd x = b;
    std::visit([&](const auto& f) { f.solve_in_place(x); }, impl_);
    return x.col(0);
}

Eigen::MatrixXd Factorization::solve(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd x = b;
    std::visit([&](const auto& f) { f.solve_in_place(x); }, impl_);
    return x;
}

double Factorization::logdet() const {
    return std::visit([](const auto& f) { return f.logdet(); }, impl_);
}

Eigen::MatrixXd Factorization::inverse() const {
    return solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(size_, size_)));
}

void Factorization::dump(std::ostream& os) const {
    fmt::print(os, "# factorization backend={} size={} jitter={:.3g} logdet={:.17g}\n", to_string(cfg_.kind),
               size_, jitter_, logdet());
    if (const auto* h = std::get_if<HodlrFactor>(&impl_)) h->describe(os);
}

Factorization factor(const Eigen::MatrixXd& k, double sigma_n, const BackendConfig& cfg) {
    if (k.rows() != k.cols() || k.rows() == 0) throw InvalidArgument("factor needs a non-empty square matrix");
    if (!std::isfinite(sigma_n) || sigma_n < 0.0) throw InvalidArgument("sigma_n must be finite and >= 0");
    if (!k.allFinite()) throw InvalidArgument("matrix has non-finite entries");

    constexpr std::array<double, 8> jitters{0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
    const double noise = sigma_n * sigma_n;
    for (double jitter : jitters) {
        Eigen::MatrixXd a = k;
        a.diagonal().array() += noise + jitter;
        if (cfg.kind == Backend::Dense) {
            DenseFactor f(a);
            if (f.ok()) return Factorization(std::move(f), cfg, jitter);
        } else {
            HodlrFactor f(a, cfg.tolerance, cfg.leaf_size);
            if (f.ok()) return Factorization(std::move(f), cfg, jitter);
        }
    }
    throw NumericalFailure(fmt::format("{} factorization failed after jitter escalation", to_string(cfg.kind)),
                           jitters.back());
}

void dump_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) fmt::print(os, j == 0 ? "{:.17g}" : " {:.17g}", m(i, j));
        os << '\n';
    }
}

} // namespace gpintent
