#pragma once

#include <iosfwd>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

namespace gpintent {

enum class Backend { Dense, Hodlr };

std::string_view to_string(Backend b);

struct BackendConfig {
    Backend kind = Backend::Hodlr;
    double tolerance = 1e-8;  // relative Frobenius tolerance per off-diagonal block
    int leaf_size = 32;

    static BackendConfig dense() { return {Backend::Dense, 0.0, 0}; }
    static BackendConfig hodlr(double tol = 1e-8, int leaf = 32) { return {Backend::Hodlr, tol, leaf}; }
};

/// Exact symmetric factorization A = L L^T.
class DenseFactor {
public:
    explicit DenseFactor(const Eigen::MatrixXd& a);
    bool ok() const { return ok_; }
    void solve_in_place(Eigen::Ref<Eigen::MatrixXd> b) const;
    double logdet() const { return logdet_; }
    Eigen::MatrixXd inverse() const;
    Eigen::Index size() const { return llt_.rows(); }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double logdet_ = 0.0;
    bool ok_ = false;
};

/// Hierarchical off-diagonal low-rank factorization.
///
/// The matrix is split recursively into two diagonal blocks and an
/// off-diagonal coupling A12 = U V^T (A21 = V U^T) compressed to the given
/// tolerance. Each level is written as
///
///     A = diag(A11, A22) (I + W Q^T),   W = diag(A11^-1 U, A22^-1 V)
///
/// so a solve is two child solves followed by a 2r x 2r Woodbury correction,
/// and log det A = log det A11 + log det A22 + log det(I + Q^T W).
/// Leaves of at most leaf_size rows are Cholesky-factored.
class HodlrFactor {
public:
    HodlrFactor(const Eigen::MatrixXd& a, double tolerance, int leaf_size);
    bool ok() const { return ok_; }
    void solve_in_place(Eigen::Ref<Eigen::MatrixXd> b) const;
    double logdet() const { return logdet_; }
    Eigen::Index size() const { return nodes_.front().size; }
    int max_rank() const;
    int levels() const;
    void describe(std::ostream& os) const;

private:
    struct Node {
        Eigen::Index begin = 0;
        Eigen::Index size = 0;
        int left = -1;
        int right = -1;
        int depth = 0;
        Eigen::LLT<Eigen::MatrixXd> leaf;
        Eigen::MatrixXd u, v, w_left, w_right;
        Eigen::PartialPivLU<Eigen::MatrixXd> coupling;
        Eigen::Index rank = 0;
    };

    int build(const Eigen::MatrixXd& a, Eigen::Index begin, Eigen::Index size, int depth);
    void solve_node(int idx, Eigen::Ref<Eigen::MatrixXd> b) const;

    std::vector<Node> nodes_;
    double tolerance_;
    int leaf_size_;
    double logdet_ = 0.0;
    bool ok_ = true;
};

/// Low-rank approximation block ~= U V^T by fully pivoted adaptive cross
/// approximation; stops once ||residual||_F <= tol * ||block||_F.
void compress_block(const Eigen::Ref<const Eigen::MatrixXd>& block, double tol, Eigen::MatrixXd& u,
                    Eigen::MatrixXd& v);

/// Factor of (K + (sigma_n^2 + jitter) I) behind either backend.
class Factorization {
public:
    Factorization(std::variant<DenseFactor, HodlrFactor> impl, BackendConfig cfg, double jitter);

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
    double logdet() const;
    Eigen::Index size() const { return size_; }
    const BackendConfig& config() const { return cfg_; }
    double jitter() const { return jitter_; }
    /// Inverse of the factored matrix (dense; used for likelihood gradients).
    Eigen::MatrixXd inverse() const;
    void dump(std::ostream& os) const;

private:
    std::variant<DenseFactor, HodlrFactor> impl_;
    BackendConfig cfg_;
    double jitter_;
    Eigen::Index size_;
};

/// Factor K + sigma_n^2 I. Tries without jitter, then escalates from 1e-10 by
/// x10 up to 1e-4; throws NumericalFailure carrying the last jitter tried.
Factorization factor(const Eigen::MatrixXd& k, double sigma_n, const BackendConfig& cfg);

/// Plain-text matrix dump (one row per line, space separated, %.17g).
void dump_matrix(std::ostream& os, const Eigen::MatrixXd& m);

} // namespace gpintent
