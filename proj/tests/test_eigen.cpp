#include "rnsc/eigen.hpp"
#include "rnsc/graph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace rnsc;
using rnsc::oracle::random_connected_knn;

namespace {

EigenOptions with(EigenMethod method) {
    EigenOptions opt;
    opt.method = method;
    return opt;
}

}  // namespace

TEST(DenseEigOracle, IdentityAndDiagonal) {
    const auto id = dense_eig_oracle(Eigen::MatrixXd::Identity(3, 3));
    EXPECT_TRUE(id.values.isApprox(Eigen::Vector3d(1, 1, 1)));

    const auto diag = dense_eig_oracle(Eigen::Vector3d(1, 2, 3).asDiagonal().toDenseMatrix());
    EXPECT_TRUE(diag.values.isApprox(Eigen::Vector3d(1, 2, 3)));
    EXPECT_TRUE(diag.vectors.isApprox(Eigen::Matrix3d::Identity()));
}

TEST(DenseEigOracle, ReconstructsRandomSymmetric) {
    const auto a = oracle::random_points(100, 100, 31);
    const Eigen::MatrixXd m = a + a.transpose();
    const auto eig = dense_eig_oracle(m);
    const Eigen::MatrixXd back = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    EXPECT_LE((back - m).norm(), 1e-8 * m.norm());
    for (int i = 1; i < 100; ++i) EXPECT_LE(eig.values(i - 1), eig.values(i));
}

TEST(DenseEigOracle, RejectsAsymmetric) {
    Eigen::Matrix2d m;
    m << 1, 2, 3, 4;
    EXPECT_THROW(dense_eig_oracle(m), ParameterError);
}

TEST(BottomNonzero, PathGraphP3) {
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        const auto pairs = bottom_nonzero_eigenpairs(laplacian(oracle::path_graph(3)), 1, with(method));
        ASSERT_EQ(pairs.size(), 1);
        EXPECT_NEAR(pairs.values(0), 1.0, 1e-10);
        const Eigen::Vector3d expected = Eigen::Vector3d(1, 0, -1) / std::sqrt(2.0);
        EXPECT_LE(std::min((pairs.vectors.col(0) - expected).norm(), (pairs.vectors.col(0) + expected).norm()), 1e-8);
    }
}

TEST(BottomNonzero, TriangleDoubleEigenvalue) {
    const auto g = NeighborGraph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        const auto pairs = bottom_nonzero_eigenpairs(laplacian(g), 2, with(method));
        EXPECT_NEAR(pairs.values(0), 3.0, 1e-10);
        EXPECT_NEAR(pairs.values(1), 3.0, 1e-10);
    }
}

TEST(BottomNonzero, RankErrorReportsComponents) {
    const auto g = oracle::two_triangles();
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        try {
            bottom_nonzero_eigenpairs(laplacian(g), 5, with(method));
            FAIL() << "expected RankError";
        } catch (const RankError& e) {
            EXPECT_EQ(e.components(), 2);
        }
        EXPECT_NO_THROW(bottom_nonzero_eigenpairs(laplacian(g), 4, with(method)));
    }
}

TEST(BottomNonzero, ResidualContractAndOrthonormality) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto g = build_knn_graph(oracle::random_points(150, 3, seed), 5);
        const auto lap = laplacian(g);
        const double lambda_max = dense_eig_oracle(lap.dense()).values.maxCoeff();
        for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
            const auto pairs = bottom_nonzero_eigenpairs(lap, 6, with(method));
            for (int i = 0; i < 6; ++i) {
                const Eigen::VectorXd v = pairs.vectors.col(i);
                EXPECT_NEAR(v.norm(), 1.0, 1e-8);
                EXPECT_LE((lap.matrix() * v - pairs.values(i) * v).norm(), 1e-6 * lambda_max);
            }
            const Eigen::MatrixXd gram = pairs.vectors.transpose() * pairs.vectors;
            EXPECT_LE((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(BottomNonzero, IterativeMatchesDenseSmallGraphs) {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        const int n = 40 + static_cast<int>(seed - 10) * 30;
        const auto g = build_knn_graph(oracle::random_points(n, 2, seed), 3);  // may be disconnected
        const auto lap = laplacian(g);
        const auto dense = bottom_nonzero_eigenpairs(lap, 5, with(EigenMethod::dense));
        const auto iter = bottom_nonzero_eigenpairs(lap, 5, with(EigenMethod::iterative));
        for (int i = 0; i < 5; ++i) EXPECT_NEAR(iter.values(i), dense.values(i), 1e-8) << "n=" << n;
    }
}

TEST(GeneralizedTop, IdenticalGraphsGiveOnes) {
    const auto lap = laplacian(random_connected_knn(40, 3));
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        const auto pairs = generalized_top_eigenpairs(lap, lap, 3, with(method));
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(pairs.values(i), 1.0, 1e-8);
    }
}

TEST(GeneralizedTop, DoubledWeightsGiveTwos) {
    const auto lap = laplacian(random_connected_knn(35, 8));
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        const auto pairs = generalized_top_eigenpairs(lap.scaled(2.0), lap, 2, with(method));
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(pairs.values(i), 2.0, 1e-8);
    }
}

TEST(GeneralizedTop, MatchesDensePseudoinverseProduct) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto l_in = laplacian(random_connected_knn(30, seed));
        const auto l_out = laplacian(random_connected_knn(30, seed + 100));
        const auto oracle = oracle::pinv_product_eigenvalues(l_in.dense(), l_out.dense());
        for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
            const auto pairs = generalized_top_eigenpairs(l_in, l_out, 5, with(method));
            for (int i = 0; i < 5; ++i) {
                EXPECT_NEAR(pairs.values(i), oracle(i), 1e-6 * oracle(i)) << "seed " << seed;
                // the returned vector is an eigenvector of the nonsymmetric product
                Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(l_out.dense());
                cod.setThreshold(1e-8);
                const Eigen::VectorXd v = pairs.vectors.col(i);
                EXPECT_NEAR(v.norm(), 1.0, 1e-10);
                const Eigen::VectorXd mv = cod.pseudoInverse() * (l_in.dense() * v);
                EXPECT_LE((mv - pairs.values(i) * v).norm(), 1e-6 * pairs.values(0));
            }
        }
    }
}

TEST(GeneralizedTop, SeparateRescalingInvariance) {
    const auto l_in = laplacian(random_connected_knn(45, 21));
    const auto l_out = laplacian(random_connected_knn(45, 22));
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        const auto base = generalized_top_eigenpairs(l_in, l_out, 4, with(method));
        const auto in3 = generalized_top_eigenpairs(l_in.scaled(3.0), l_out, 4, with(method));
        const auto out3 = generalized_top_eigenpairs(l_in, l_out.scaled(3.0), 4, with(method));
        for (int i = 0; i < 4; ++i) {
            EXPECT_NEAR(in3.values(i), 3.0 * base.values(i), 1e-8 * 3.0 * base.values(i));
            EXPECT_NEAR(out3.values(i), base.values(i) / 3.0, 1e-8 * base.values(i) / 3.0);
        }
    }
}

TEST(GeneralizedTop, ExcludesOutputNullspace) {
    // G_out with three components, G_in connected
    const auto l_in = laplacian(random_connected_knn(60, 5));
    std::vector<Edge> edges;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 19; ++i) edges.push_back({20 * c + i, 20 * c + i + 1, 1.0});
    const auto g_out = NeighborGraph::from_edges(60, edges);
    const auto comp = connected_components(g_out);
    for (auto method : {EigenMethod::dense, EigenMethod::iterative}) {
        const auto pairs = generalized_top_eigenpairs(l_in, laplacian(g_out), 5, with(method));
        for (int c = 0; c < 3; ++c) {
            Eigen::VectorXd u = Eigen::VectorXd::Zero(60);
            for (int i = 0; i < 60; ++i)
                if (comp[i] == c) u(i) = 1.0;
            u.normalize();
            for (int j = 0; j < 5; ++j) EXPECT_LE(std::abs(u.dot(pairs.vectors.col(j))), 1e-6);
        }
        for (int j = 0; j < 5; ++j) EXPECT_GE(pairs.values(j), 0.0);
    }
}

TEST(GeneralizedTop, ErrorPaths) {
    const auto a = laplacian(oracle::path_graph(5));
    const auto b = laplacian(oracle::path_graph(6));
    EXPECT_THROW(generalized_top_eigenpairs(a, b, 1), ParameterError);
    EXPECT_THROW(generalized_top_eigenpairs(a, a, 5), RankError);
}

TEST(Timed, PositiveAndDeterministic) {
    const auto lap = laplacian(oracle::path_graph(3));
    auto first = timed([&] { return dense_eig_oracle(lap.dense()); });
    auto second = timed([&] { return dense_eig_oracle(lap.dense()); });
    EXPECT_GT(first.seconds, 0.0);
    EXPECT_EQ(first.value.values, second.value.values);
    EXPECT_EQ(first.value.vectors, second.value.vectors);
}

TEST(Timed, PropagatesErrors) {
    EXPECT_THROW(timed([]() -> int { throw RankError("boom", 1); }), RankError);
}
