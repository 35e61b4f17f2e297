#include "rnsc/dataset.hpp"
#include "rnsc/graph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace rnsc;
using rnsc::oracle::brute_force_knn;
using rnsc::oracle::random_points;

namespace {

RowMatrix column(std::initializer_list<double> xs) {
    RowMatrix x(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double v : xs) x(i++, 0) = v;
    return x;
}

std::vector<std::pair<int, int>> edge_pairs(const NeighborGraph& g) {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : g.edges()) out.emplace_back(e.i, e.j);
    return out;
}

}  // namespace

TEST(BuildKnnGraph, CollinearPointsWithTie) {
    const auto x = column({0, 1, 2, 10});
    const auto g = build_knn_graph(x, 1);
    // oracle: exhaustive pairwise scan
    EXPECT_EQ(g.knn_lists(), brute_force_knn(x, 1));
    EXPECT_EQ(g.knn_lists(), (std::vector<std::vector<int>>{{1}, {0}, {1}, {2}}));
    EXPECT_EQ(edge_pairs(g), (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}}));
}

TEST(BuildKnnGraph, TenNeighbourListsAreFull) {
    const auto ps = make_blobs(40, 3, 4, 0.3, 2, 5);
    const auto g = build_knn_graph(ps, 10);
    ASSERT_EQ(static_cast<int>(g.knn_lists().size()), ps.size());
    for (const auto& list : g.knn_lists()) EXPECT_EQ(list.size(), 10u);
}

TEST(BuildKnnGraph, TwoNodesSingleEdgeEitherMetric) {
    RowMatrix x(2, 2);
    x << 1.0, 2.0, -3.0, 0.5;
    for (auto metric : {Metric::euclidean, Metric::cosine}) {
        const auto g = build_knn_graph(x, 1, metric);
        EXPECT_EQ(edge_pairs(g), (std::vector<std::pair<int, int>>{{0, 1}}));
    }
}

TEST(BuildKnnGraph, KMustBeBelowN) {
    const auto x = random_points(5, 2, 1);
    EXPECT_THROW(build_knn_graph(x, 5), ParameterError);
    EXPECT_THROW(build_knn_graph(x, 0), ParameterError);
}

TEST(BuildKnnGraph, DuplicatePointsTieToLowerIndex) {
    RowMatrix x(4, 1);
    x << 0.0, 0.0, 0.0, 5.0;
    const auto g = build_knn_graph(x, 1);
    EXPECT_EQ(g.knn_lists(), (std::vector<std::vector<int>>{{1}, {0}, {0}, {0}}));
}

TEST(BuildKnnGraph, MatchesBruteForceAcrossBlocks) {
    // more rows than one screening block
    for (std::uint64_t seed : {3u, 4u}) {
        const auto x = random_points(300, 5, seed);
        const auto g = build_knn_graph(x, 7);
        EXPECT_EQ(g.knn_lists(), brute_force_knn(x, 7));
    }
}

TEST(BuildKnnGraph, CosineIgnoresPositiveScaling) {
    auto x = random_points(60, 4, 8);
    const auto before = build_knn_graph(x, 5, Metric::cosine);
    x.row(17) *= 3.7;
    x.row(4) *= 0.01;
    const auto after = build_knn_graph(x, 5, Metric::cosine);
    EXPECT_EQ(before.knn_lists()[17], after.knn_lists()[17]);
    EXPECT_EQ(before.knn_lists()[4], after.knn_lists()[4]);
}

TEST(BuildKnnGraph, PermutationEquivariant) {
    const auto x = random_points(80, 3, 21);
    std::vector<int> perm(80);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(2);
    std::shuffle(perm.begin(), perm.end(), rng);
    RowMatrix y(80, 3);
    for (int i = 0; i < 80; ++i) y.row(perm[i]) = x.row(i);  // point i moves to slot perm[i]
    const auto gx = build_knn_graph(x, 6);
    const auto gy = build_knn_graph(y, 6);
    std::vector<Edge> mapped;
    for (const auto& e : gx.edges()) mapped.push_back({perm[e.i], perm[e.j], e.w});
    EXPECT_EQ(NeighborGraph::from_edges(80, mapped).edges(), gy.edges());
}

TEST(Symmetrize, Idempotent) {
    const auto g = build_knn_graph(random_points(50, 2, 9), 4);
    const auto again = NeighborGraph::from_edges(g.n(), g.edges());
    EXPECT_EQ(again.edges(), g.edges());
    std::vector<std::vector<int>> directed(g.n());
    for (const auto& e : g.edges()) {
        directed[e.i].push_back(e.j);
        directed[e.j].push_back(e.i);
    }
    EXPECT_EQ(symmetrize(directed), g.edges());
}

TEST(NeighborGraph, RejectsSelfLoopsAndBadWeights) {
    EXPECT_THROW(NeighborGraph::from_edges(3, {{1, 1, 1.0}}), ParameterError);
    EXPECT_THROW(NeighborGraph::from_edges(3, {{0, 1, 0.0}}), ParameterError);
    EXPECT_THROW(NeighborGraph::from_edges(3, {{0, 3, 1.0}}), ParameterError);
}

TEST(Laplacian, Triangle) {
    const auto g = NeighborGraph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
    const auto l = laplacian(g).dense();
    Eigen::Matrix3d expected;
    expected << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    EXPECT_TRUE(l.isApprox(expected));
}

TEST(Laplacian, Path) {
    const auto l = laplacian(oracle::path_graph(3)).dense();
    Eigen::Matrix3d expected;
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    EXPECT_TRUE(l.isApprox(expected));
}

TEST(Laplacian, QuadraticFormIdentity) {
    const auto g = build_knn_graph(random_points(50, 3, 13), 5);
    const auto lap = laplacian(g);
    const auto& l = lap.matrix();
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x(50);
        for (auto& v : x) v = gauss(rng);
        double brute = 0.0;
        for (const auto& e : g.edges()) brute += e.w * (x(e.i) - x(e.j)) * (x(e.i) - x(e.j));
        const double form = x.dot(l * x);
        EXPECT_NEAR(form, brute, 1e-10 * std::max(1.0, brute));
    }
}

TEST(Laplacian, StructuralInvariants) {
    const auto g = build_knn_graph(random_points(70, 4, 17), 6);
    const auto lap = laplacian(g);
    const Eigen::MatrixXd l = lap.dense();
    EXPECT_TRUE(l.isApprox(l.transpose()));
    EXPECT_LE(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
    for (int i = 0; i < 70; ++i) {
        EXPECT_DOUBLE_EQ(l(i, i), g.degree(i));
        for (int j = 0; j < 70; ++j)
            if (i != j) EXPECT_LE(l(i, j), 0.0);
    }
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(70);
        for (auto& v : x) v = gauss(rng);
        EXPECT_GE(x.dot(l * x), -1e-10);
    }
    EXPECT_TRUE(oracle::dense_laplacian(g).isApprox(l));
}

TEST(ConnectedComponents, PathAndDisjointEdges) {
    EXPECT_EQ(connected_components(oracle::path_graph(3)), (std::vector<int>{0, 0, 0}));
    const auto g = NeighborGraph::from_edges(4, {{0, 1}, {2, 3}});
    EXPECT_EQ(connected_components(g), (std::vector<int>{0, 0, 1, 1}));
    const auto h = NeighborGraph::from_edges(5, {{3, 4}, {1, 2}});
    EXPECT_EQ(connected_components(h), (std::vector<int>{0, 1, 1, 2, 2}));
}

TEST(ConnectedComponents, CountEqualsZeroEigenvalueMultiplicity) {
    // clumps far apart give several components
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        RowMatrix x = random_points(60, 2, seed) * 0.1;
        for (int i = 0; i < 60; ++i) x(i, 0) += 100.0 * static_cast<double>(i % (1 + seed % 4));
        const auto g = build_knn_graph(x, 3);
        const int components = count_components(connected_components(g));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::dense_laplacian(g));
        const int zeros = static_cast<int>((es.eigenvalues().array().abs() < 1e-8).count());
        EXPECT_EQ(components, zeros) << "seed " << seed;
        EXPECT_EQ(count_components(laplacian(g).pattern_components()), components);
    }
}

TEST(EdgeList, SortedTextDump) {
    const auto g = NeighborGraph::from_edges(4, {{2, 3, 1.0}, {1, 0, 2.5}});
    std::ostringstream out;
    write_edge_list(g, out);
    EXPECT_EQ(out.str(), "0 1 2.5\n2 3 1\n");
}
