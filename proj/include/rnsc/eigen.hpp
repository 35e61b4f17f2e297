#pragma once

#include "rnsc/detail/krylov.hpp"
#include "rnsc/detail/projected_cg.hpp"
#include "rnsc/error.hpp"
#include "rnsc/graph.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

namespace rnsc {

/// Eigenvalues with unit-norm eigenvectors in matching columns.
struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    int size() const noexcept { return static_cast<int>(values.size()); }
};

enum class EigenMethod { automatic, dense, iterative };

struct EigenOptions {
    double zero_tol = 1e-8;
    EigenMethod method = EigenMethod::automatic;
    /// automatic uses the dense path up to this many nodes
    int dense_limit = 300;
    /// relative Ritz residual at which the iterative path stops
    double tol = 1e-10;
};

inline constexpr double kDefaultZeroTol = 1e-8;

namespace detail {

inline bool use_dense(int n, const EigenOptions& opt) {
    switch (opt.method) {
        case EigenMethod::dense: return true;
        case EigenMethod::iterative: return false;
        case EigenMethod::automatic: break;
    }
    return n <= opt.dense_limit;
}

/// Fixes the sign of each column so its largest-magnitude entry (first on
/// ties) is positive and rescales it to unit length.
inline void canonicalize_columns(Eigen::MatrixXd& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        const double norm = v.col(c).norm();
        if (norm > 0.0) v.col(c) /= norm;
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            // compare with slack so round-off cannot flip which entry wins
            if (std::abs(v(r, c)) > best * (1.0 + 1e-9)) {
                best = std::abs(v(r, c));
                arg = r;
            }
        }
        if (v(arg, c) < 0.0) v.col(c) = -v.col(c);
    }
}

}  // namespace detail

/// Full spectrum of a dense symmetric matrix, ascending.
inline EigenPairs dense_eig_oracle(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw ParameterError("dense_eig_oracle: matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ParameterError("dense_eig_oracle: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    EigenPairs out{solver.eigenvalues(), solver.eigenvectors()};
    detail::canonicalize_columns(out.vectors);
    return out;
}

/// The m smallest eigenpairs of L above zero_tol * lambda_max, ascending.
///
/// Iterative path: the nullspace of a Laplacian is spanned exactly by its
/// component indicators, so these are deflated and the wanted pairs are found
/// as the top pairs of the pseudoinverse (applied by projected CG).
inline EigenPairs bottom_nonzero_eigenpairs(const LaplacianMatrix& lap, int m,
                                            const EigenOptions& opt = {}) {
    const int n = lap.n();
    const auto comp = lap.pattern_components();
    const int components = count_components(comp);
    if (m < 1) throw ParameterError("bottom_nonzero_eigenpairs: m must be positive");
    if (m + components > n) {
        throw RankError("requested " + std::to_string(m) + " nonzero eigenpairs but the graph has " +
                            std::to_string(components) + " components on " + std::to_string(n) +
                            " nodes",
                        components);
    }

    EigenPairs out;
    double lambda_max = 0.0;
    if (detail::use_dense(n, opt)) {
        const auto full = dense_eig_oracle(lap.dense());
        lambda_max = full.values(n - 1);
        const double cutoff = opt.zero_tol * lambda_max;
        int first = 0;
        while (first < n && full.values(first) <= cutoff) ++first;
        if (first + m > n) {
            throw RankError("only " + std::to_string(n - first) + " eigenvalues above the zero "
                            "cutoff; graph has " + std::to_string(components) + " components",
                            components);
        }
        out.values = full.values.segment(first, m);
        out.vectors = full.vectors.middleCols(first, m);
    } else {
        const Eigen::MatrixXd z = detail::indicator_basis(comp);
        const auto& sparse = lap.matrix();

        detail::KrylovProblem top;
        top.n = n;
        top.apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return sparse * x; };
        top.deflate = z;
        detail::KrylovOptions top_opt;
        top_opt.nev = 1;
        top_opt.tol = 1e-8;
        lambda_max = detail::top_eigenpairs(top, top_opt).values(0);

        detail::LaplacianPseudoInverse pinv(sparse, z);
        detail::KrylovProblem inv;
        inv.n = n;
        inv.apply = [&](const Eigen::VectorXd& x) { return pinv.solve(x); };
        inv.deflate = z;
        detail::KrylovOptions inv_opt;
        inv_opt.nev = m;
        inv_opt.tol = opt.tol;
        const auto res = detail::top_eigenpairs(inv, inv_opt);

        out.values.resize(m);
        out.vectors = res.vectors;
        for (int i = 0; i < m; ++i) out.values(i) = 1.0 / res.values(i);
        if (out.values(0) <= opt.zero_tol * lambda_max) {
            throw RankError("smallest nonzero eigenvalue falls below the zero cutoff", components);
        }
    }
    detail::canonicalize_columns(out.vectors);

    const auto& sparse = lap.matrix();
    for (int i = 0; i < m; ++i) {
        const double res = (sparse * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
        if (res > 1e-6 * lambda_max) {
            throw NumericalError("eigenpair " + std::to_string(i) + " residual " + std::to_string(res) +
                                 " exceeds 1e-6 * lambda_max");
        }
    }
    return out;
}

inline EigenPairs bottom_nonzero_eigenpairs(const LaplacianMatrix& lap, int m, double zero_tol) {
    EigenOptions opt;
    opt.zero_tol = zero_tol;
    return bottom_nonzero_eigenpairs(lap, m, opt);
}

/// The m largest eigenpairs of pinv(L_out) * L_in on the complement of
/// L_out's nullspace, descending, eigenvalues clamped at zero.
///
/// Dense path: eigendecompose L_out, keep eigenvalues above
/// zero_tol * lambda_max(L_out), and solve the symmetric problem
/// D^{-1/2} U^T L_in U D^{-1/2}; eigenvectors map back through U D^{-1/2}.
/// Iterative path: Lanczos in the L_out inner product on pinv(L_out) L_in,
/// with pinv(L_out) applied by projected CG.
inline EigenPairs generalized_top_eigenpairs(const LaplacianMatrix& l_in, const LaplacianMatrix& l_out,
                                             int m, const EigenOptions& opt = {}) {
    const int n = l_in.n();
    if (l_out.n() != n) {
        throw ParameterError("generalized_top_eigenpairs: dimension mismatch (" + std::to_string(n) +
                             " vs " + std::to_string(l_out.n()) + ")");
    }
    if (m < 1) throw ParameterError("generalized_top_eigenpairs: m must be positive");
    const auto comp = l_out.pattern_components();
    const int components = count_components(comp);
    if (m > n - components) {
        throw RankError("requested " + std::to_string(m) + " generalized eigenpairs but L_out has rank " +
                            std::to_string(n - components),
                        components);
    }

    EigenPairs out;
    if (detail::use_dense(n, opt)) {
        const auto out_eig = dense_eig_oracle(l_out.dense());
        const double cutoff = opt.zero_tol * out_eig.values(n - 1);
        int first = 0;
        while (first < n && out_eig.values(first) <= cutoff) ++first;
        const int rank = n - first;
        if (m > rank) {
            throw RankError("L_out has numerical rank " + std::to_string(rank) + ", requested " +
                                std::to_string(m),
                            components);
        }
        const Eigen::MatrixXd half =
            out_eig.vectors.rightCols(rank) *
            out_eig.values.tail(rank).cwiseSqrt().cwiseInverse().asDiagonal();
        const Eigen::MatrixXd l_in_dense = l_in.dense();
        Eigen::MatrixXd k = half.transpose() * l_in_dense * half;
        k = 0.5 * (k + k.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
        if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
        out.values = solver.eigenvalues().tail(m).reverse();
        out.vectors = half * solver.eigenvectors().rightCols(m).rowwise().reverse();
    } else {
        const Eigen::MatrixXd z = detail::indicator_basis(comp);
        const auto& a = l_in.matrix();
        const auto& b = l_out.matrix();
        detail::LaplacianPseudoInverse pinv(b, z);
        detail::KrylovProblem prob;
        prob.n = n;
        prob.apply = [&](const Eigen::VectorXd& x) { return pinv.solve(a * x); };
        prob.metric = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return b * x; };
        prob.deflate = z;
        detail::KrylovOptions kopt;
        kopt.nev = m;
        kopt.tol = opt.tol;
        const auto res = detail::top_eigenpairs(prob, kopt);
        out.values = res.values;
        out.vectors = res.vectors;
    }
    for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values(i) = std::max(0.0, out.values(i));
    // both paths produce L_out-orthonormal vectors; report unit 2-norm ones
    out.vectors.colwise().normalize();
    detail::canonicalize_columns(out.vectors);
    return out;
}

inline EigenPairs generalized_top_eigenpairs(const LaplacianMatrix& l_in, const LaplacianMatrix& l_out,
                                             int m, double zero_tol) {
    EigenOptions opt;
    opt.zero_tol = zero_tol;
    return generalized_top_eigenpairs(l_in, l_out, m, opt);
}

/// Result of `timed`: the wrapped call's value plus monotonic wall seconds.
template <class T>
struct Timed {
    T value;
    double seconds = 0.0;
};

template <class F>
auto timed(F&& f) -> Timed<std::invoke_result_t<F>> {
    const auto start = std::chrono::steady_clock::now();
    auto value = std::forward<F>(f)();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return {std::move(value), elapsed.count()};
}

}  // namespace rnsc
