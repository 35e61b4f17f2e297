#pragma once

#include "rnsc/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <vector>

namespace rnsc::detail {

/// Orthonormal basis of component indicator vectors, one column per component.
inline Eigen::MatrixXd indicator_basis(const std::vector<int>& comp) {
    int count = 0;
    for (int c : comp) count = std::max(count, c + 1);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(comp.size()), count);
    std::vector<double> sizes(static_cast<std::size_t>(count), 0.0);
    for (std::size_t i = 0; i < comp.size(); ++i) sizes[static_cast<std::size_t>(comp[i])] += 1.0;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        z(static_cast<Eigen::Index>(i), comp[i]) = 1.0 / std::sqrt(sizes[static_cast<std::size_t>(comp[i])]);
    }
    return z;
}

/// x <- x - Z Z^T x for orthonormal Z.
inline void project_out(const Eigen::MatrixXd& z, Eigen::VectorXd& x) {
    if (z.cols() == 0) return;
    x.noalias() -= z * (z.transpose() * x);
}

/// Applies the pseudoinverse of a Laplacian whose nullspace is spanned by the
/// columns of `nullspace`, using Jacobi-preconditioned conjugate gradients on
/// the orthogonal complement. Returns the minimum-norm solution.
class LaplacianPseudoInverse {
public:
    LaplacianPseudoInverse(const Eigen::SparseMatrix<double>& laplacian, Eigen::MatrixXd nullspace,
                           double rel_tol = 1e-13, int max_iter = 0)
        : l_(laplacian),
          z_(std::move(nullspace)),
          rel_tol_(rel_tol),
          max_iter_(max_iter > 0 ? max_iter : 20 * static_cast<int>(laplacian.rows()) + 100) {
        inv_diag_ = l_.diagonal();
        for (Eigen::Index i = 0; i < inv_diag_.size(); ++i) {
            inv_diag_(i) = inv_diag_(i) > 0.0 ? 1.0 / inv_diag_(i) : 0.0;
        }
    }

    Eigen::VectorXd solve(Eigen::VectorXd b) const {
        project_out(z_, b);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
        const double bnorm = b.norm();
        if (bnorm == 0.0) return x;

        Eigen::VectorXd r = b;
        Eigen::VectorXd zr = inv_diag_.cwiseProduct(r);
        project_out(z_, zr);
        Eigen::VectorXd p = zr;
        Eigen::VectorXd lp(b.size());
        double rz = r.dot(zr);
        int it = 0;
        for (; it < max_iter_; ++it) {
            lp.noalias() = l_ * p;
            const double denom = p.dot(lp);
            if (!(denom > 0.0)) break;
            const double alpha = rz / denom;
            x.noalias() += alpha * p;
            r.noalias() -= alpha * lp;
            if (r.norm() <= rel_tol_ * bnorm) break;
            zr = inv_diag_.cwiseProduct(r);
            project_out(z_, zr);
            const double rz_next = r.dot(zr);
            p = zr + (rz_next / rz) * p;
            rz = rz_next;
        }
        iterations_ += it + 1;
        project_out(z_, x);
        return x;
    }

    long long total_iterations() const noexcept { return iterations_; }

private:
    const Eigen::SparseMatrix<double>& l_;
    Eigen::MatrixXd z_;
    Eigen::VectorXd inv_diag_;
    double rel_tol_;
    int max_iter_;
    mutable long long iterations_ = 0;
};

}  // namespace rnsc::detail
