#pragma once

#include "rnsc/error.hpp"
#include "rnsc/point_set.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace rnsc {

enum class Metric { euclidean, cosine };

struct Edge {
    int i = 0;
    int j = 0;
    double w = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    int id = 0;
    double w = 1.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Undirected weighted graph: unique edges with i < j, plus the derived
/// adjacency and (for k-NN builds) the directed neighbor lists it came from.
class NeighborGraph {
public:
    NeighborGraph() = default;

    /// Builds from an undirected edge list. Orientation and order do not
    /// matter; (i,j) and (j,i) collapse into one edge whose weight is the max.
    static NeighborGraph from_edges(int n, std::vector<Edge> edges,
                                    std::vector<std::vector<int>> knn_lists = {}) {
        if (n < 1) throw ParameterError("graph needs at least one node");
        for (auto& e : edges) {
            if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
                throw ParameterError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                     ") outside 0.." + std::to_string(n - 1));
            }
            if (e.i == e.j) throw ParameterError("self-loop at node " + std::to_string(e.i));
            if (!(e.w > 0.0) || !std::isfinite(e.w)) {
                throw ParameterError("edge weights must be positive and finite");
            }
            if (e.i > e.j) std::swap(e.i, e.j);
        }
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.i, a.j, b.w) < std::tie(b.i, b.j, a.w);
        });
        // after the sort the heaviest duplicate comes first
        edges.erase(std::unique(edges.begin(), edges.end(),
                                [](const Edge& a, const Edge& b) { return a.i == b.i && a.j == b.j; }),
                    edges.end());

        NeighborGraph g;
        g.n_ = n;
        g.edges_ = std::move(edges);
        g.adjacency_.assign(static_cast<std::size_t>(n), {});
        for (const auto& e : g.edges_) {
            g.adjacency_[static_cast<std::size_t>(e.i)].push_back({e.j, e.w});
            g.adjacency_[static_cast<std::size_t>(e.j)].push_back({e.i, e.w});
        }
        for (auto& list : g.adjacency_) {
            std::sort(list.begin(), list.end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
        }
        g.knn_lists_ = std::move(knn_lists);
        return g;
    }

    int n() const noexcept { return n_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<std::vector<Neighbor>>& adjacency() const noexcept { return adjacency_; }
    const std::vector<Neighbor>& neighbors(int node) const {
        return adjacency_.at(static_cast<std::size_t>(node));
    }
    /// Directed k nearest neighbors per node, closest first. Empty for graphs
    /// not produced by build_knn_graph.
    const std::vector<std::vector<int>>& knn_lists() const noexcept { return knn_lists_; }

    double degree(int node) const {
        double d = 0.0;
        for (const auto& nb : neighbors(node)) d += nb.w;
        return d;
    }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<std::vector<int>> knn_lists_;
};

/// Union symmetrization of directed neighbor lists into unit-weight edges.
inline std::vector<Edge> symmetrize(const std::vector<std::vector<int>>& directed) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < directed.size(); ++i) {
        for (int j : directed[i]) {
            const int a = std::min(static_cast<int>(i), j);
            const int b = std::max(static_cast<int>(i), j);
            edges.push_back({a, b, 1.0});
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& x, const Edge& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

namespace detail {

inline constexpr Eigen::Index kKnnBlock = 128;

}  // namespace detail

/// Brute-force k-NN graph with binary weights and union symmetrization.
///
/// Distances are screened in blocks with a Gram-matrix product, then every
/// surviving candidate is re-measured exactly, so the neighbor lists match an
/// exhaustive pairwise scan. Equal distances resolve to the lower node index.
inline NeighborGraph build_knn_graph(const RowMatrix& points, int k, Metric metric = Metric::euclidean) {
    const auto n = static_cast<int>(points.rows());
    if (k < 1 || k >= n) {
        throw ParameterError("build_knn_graph: need 1 <= k < N (k=" + std::to_string(k) +
                             ", N=" + std::to_string(n) + ")");
    }
    if (!points.allFinite()) throw ParameterError("build_knn_graph: non-finite coordinates");

    RowMatrix x = points;
    if (metric == Metric::cosine) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double norm = x.row(i).norm();
            if (norm > 0.0) x.row(i) /= norm;
        }
    }
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    const double max_sq = sq.size() ? sq.maxCoeff() : 0.0;

    auto exact = [&](int i, int j) {
        if (metric == Metric::cosine) return 1.0 - x.row(i).dot(x.row(j));
        return (x.row(i) - x.row(j)).squaredNorm();
    };

    std::vector<std::vector<int>> knn(static_cast<std::size_t>(n));
    std::vector<double> approx(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> cand;
    for (Eigen::Index start = 0; start < n; start += detail::kKnnBlock) {
        const Eigen::Index rows = std::min<Eigen::Index>(detail::kKnnBlock, n - start);
        const Eigen::MatrixXd gram = x.middleRows(start, rows) * x.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const int i = static_cast<int>(start + r);
            for (int j = 0; j < n; ++j) {
                const double dot = gram(r, j);
                approx[static_cast<std::size_t>(j)] =
                    metric == Metric::cosine ? 1.0 - dot : sq(i) + sq(j) - 2.0 * dot;
            }
            approx[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();

            std::vector<double> sorted = approx;
            std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
            const double slack =
                1e-9 * (metric == Metric::cosine ? 1.0 : sq(i) + max_sq) + 1e-300;
            const double cutoff = sorted[static_cast<std::size_t>(k - 1)] + slack;

            cand.clear();
            for (int j = 0; j < n; ++j) {
                if (j != i && approx[static_cast<std::size_t>(j)] <= cutoff) {
                    cand.emplace_back(exact(i, j), j);
                }
            }
            std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
            auto& list = knn[static_cast<std::size_t>(i)];
            list.reserve(static_cast<std::size_t>(k));
            for (int t = 0; t < k; ++t) list.push_back(cand[static_cast<std::size_t>(t)].second);
        }
    }
    auto edges = symmetrize(knn);
    return NeighborGraph::from_edges(n, std::move(edges), std::move(knn));
}

inline NeighborGraph build_knn_graph(const PointSet& ps, int k, Metric metric = Metric::euclidean) {
    return build_knn_graph(ps.points(), k, metric);
}

/// Component id per node, dense 0..C-1 ordered by each component's smallest node.
inline std::vector<int> connected_components(const NeighborGraph& g) {
    std::vector<int> comp(static_cast<std::size_t>(g.n()), -1);
    int next = 0;
    std::queue<int> frontier;
    for (int s = 0; s < g.n(); ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        comp[static_cast<std::size_t>(s)] = next;
        frontier.push(s);
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop();
            for (const auto& nb : g.neighbors(u)) {
                if (comp[static_cast<std::size_t>(nb.id)] < 0) {
                    comp[static_cast<std::size_t>(nb.id)] = next;
                    frontier.push(nb.id);
                }
            }
        }
        ++next;
    }
    return comp;
}

inline int count_components(const std::vector<int>& comp) {
    return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Unnormalized graph Laplacian L = D - W, stored in full (both triangles).
class LaplacianMatrix {
public:
    explicit LaplacianMatrix(SparseMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw ParameterError("Laplacian must be square");
        m_.makeCompressed();
    }

    int n() const noexcept { return static_cast<int>(m_.rows()); }
    const SparseMatrix& matrix() const noexcept { return m_; }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(m_); }

    LaplacianMatrix scaled(double c) const {
        if (!(c > 0.0)) throw ParameterError("Laplacian scale must be positive");
        return LaplacianMatrix(SparseMatrix(c * m_));
    }

    /// Largest Gershgorin radius bound, an upper bound on lambda_max.
    double gershgorin_bound() const {
        Eigen::VectorXd rows = Eigen::VectorXd::Zero(n());
        for (int c = 0; c < m_.outerSize(); ++c) {
            for (SparseMatrix::InnerIterator it(m_, c); it; ++it) rows(it.row()) += std::abs(it.value());
        }
        return rows.size() ? rows.maxCoeff() : 0.0;
    }

    /// Connected components of the off-diagonal sparsity pattern; these span
    /// the nullspace of any Laplacian.
    std::vector<int> pattern_components() const {
        std::vector<Edge> edges;
        for (int c = 0; c < m_.outerSize(); ++c) {
            for (SparseMatrix::InnerIterator it(m_, c); it; ++it) {
                if (it.row() < c && it.value() != 0.0) {
                    edges.push_back({static_cast<int>(it.row()), c, 1.0});
                }
            }
        }
        return connected_components(NeighborGraph::from_edges(n(), std::move(edges)));
    }

private:
    SparseMatrix m_;
};

inline LaplacianMatrix laplacian(const NeighborGraph& g) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(g.edges().size() * 4);
    for (const auto& e : g.edges()) {
        triplets.emplace_back(e.i, e.j, -e.w);
        triplets.emplace_back(e.j, e.i, -e.w);
        triplets.emplace_back(e.i, e.i, e.w);
        triplets.emplace_back(e.j, e.j, e.w);
    }
    SparseMatrix m(g.n(), g.n());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return LaplacianMatrix(std::move(m));
}

/// Edge list dump, one "i j w" line per edge sorted by (i, j).
inline void write_edge_list(const NeighborGraph& g, std::ostream& out) {
    const auto precision = out.precision(17);
    for (const auto& e : g.edges()) out << e.i << ' ' << e.j << ' ' << e.w << '\n';
    out.precision(precision);
}

}  // namespace rnsc
