#pragma once

// Thick-restart Lanczos with full reorthogonalization, written in explicit
// Rayleigh-Ritz form so it also covers the generalized case.
//
// Finds the largest eigenpairs of an operator M that is self-adjoint in the
// inner product <x, y>_B = x^T B y (B = I for ordinary symmetric problems),
// restricted to the complement of an explicitly given nullspace Z. Each
// basis vector q_j is kept together with M q_j and B q_j, so the projected
// matrix H = (BQ)^T (MQ) and every Ritz residual cost no extra operator
// applications. After a cycle the leading Ritz vectors are kept and the last
// expansion direction resumes the Krylov sequence.

#include "rnsc/detail/projected_cg.hpp"
#include "rnsc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>

namespace rnsc::detail {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovProblem {
    Eigen::Index n = 0;
    LinearMap apply;          // x -> M x
    LinearMap metric;         // x -> B x; empty means identity
    Eigen::MatrixXd deflate;  // orthonormal columns excluded from the search space
};

struct KrylovOptions {
    int nev = 1;
    int ncv = 0;  // 0 picks max(2 nev + 10, 30)
    double tol = 1e-10;
    int max_restarts = 1000;
    std::uint64_t seed = 0x5eed;
};

struct KrylovResult {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // B-orthonormal columns
    int restarts = 0;
    int applications = 0;
};

inline KrylovResult top_eigenpairs(const KrylovProblem& prob, const KrylovOptions& opt) {
    const Eigen::Index n = prob.n;
    const Eigen::Index space = n - prob.deflate.cols();
    if (opt.nev < 1 || opt.nev > space) {
        throw RankError("requested " + std::to_string(opt.nev) + " eigenpairs from a " +
                            std::to_string(space) + "-dimensional space",
                        static_cast<int>(prob.deflate.cols()));
    }
    const int nev = opt.nev;
    int ncv = opt.ncv > 0 ? opt.ncv : std::max(2 * nev + 10, 30);
    ncv = static_cast<int>(std::min<Eigen::Index>(ncv, space));
    ncv = std::max(ncv, nev);

    auto metric = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return prob.metric ? prob.metric(x) : x;
    };

    Eigen::MatrixXd q(n, ncv), mq(n, ncv), bq(n, ncv);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss;

    KrylovResult out;

    // B-orthonormalize w against the first `cols` basis vectors (two passes).
    auto orthonormalize = [&](Eigen::VectorXd& w, Eigen::Index cols) -> double {
        for (int pass = 0; pass < 2; ++pass) {
            project_out(prob.deflate, w);
            if (cols > 0) w.noalias() -= q.leftCols(cols) * (bq.leftCols(cols).transpose() * w);
        }
        const double norm2 = w.dot(metric(w));
        return norm2 > 0.0 ? std::sqrt(norm2) : 0.0;
    };

    auto random_direction = [&](Eigen::Index cols) {
        for (int attempt = 0; attempt < 20; ++attempt) {
            Eigen::VectorXd w(n);
            for (Eigen::Index i = 0; i < n; ++i) w(i) = gauss(rng);
            const double scale = w.norm();
            const double norm = orthonormalize(w, cols);
            if (norm > 1e-8 * scale) return Eigen::VectorXd(w / norm);
        }
        throw NumericalError("Krylov solver: cannot extend the search space");
    };

    Eigen::VectorXd next = random_direction(0);
    Eigen::Index kept = 0;
    double scale_hint = 0.0;

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        for (Eigen::Index j = kept; j < ncv; ++j) {
            q.col(j) = next;
            mq.col(j) = prob.apply(next);
            bq.col(j) = metric(next);
            ++out.applications;
            if (j + 1 == ncv && ncv == space) break;
            Eigen::VectorXd w = mq.col(j);
            const double beta = orthonormalize(w, j + 1);
            const double ref = std::max(mq.col(j).norm(), scale_hint);
            if (beta <= 1e-10 * ref) {
                next = random_direction(j + 1);
            } else {
                next = w / beta;
            }
        }

        Eigen::MatrixXd h = bq.transpose() * mq;
        h = 0.5 * (h + h.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
        // descending order
        const Eigen::VectorXd theta = small.eigenvalues().reverse();
        const Eigen::MatrixXd y = small.eigenvectors().rowwise().reverse();
        scale_hint = std::max(std::abs(theta(0)), std::abs(theta(ncv - 1)));

        const Eigen::MatrixXd x = q * y.leftCols(nev);
        const Eigen::MatrixXd mx = mq * y.leftCols(nev);
        bool converged = true;
        const double ref = std::max(scale_hint, 1e-300);
        for (int i = 0; i < nev && converged; ++i) {
            const double res = (mx.col(i) - theta(i) * x.col(i)).norm();
            converged = res <= opt.tol * ref * x.col(i).norm();
        }
        if (converged || ncv == space) {
            out.values = theta.head(nev);
            out.vectors = x;
            out.restarts = restart;
            return out;
        }

        kept = std::min<Eigen::Index>(nev + (ncv - nev) / 2, ncv - 1);
        const Eigen::MatrixXd yk = y.leftCols(kept);
        q.leftCols(kept) = (q * yk).eval();
        mq.leftCols(kept) = (mq * yk).eval();
        bq.leftCols(kept) = (bq * yk).eval();
        // `next` is B-orthogonal to the old basis, hence to the kept Ritz vectors;
        // reorthogonalize anyway against drift.
        const double norm = orthonormalize(next, kept);
        next = norm > 1e-10 ? Eigen::VectorXd(next / norm) : random_direction(kept);
    }
    throw NumericalError("Krylov solver did not converge within " +
                         std::to_string(opt.max_restarts) + " restarts");
}

}  // namespace rnsc::detail
