#pragma once

#include "rnsc/eigen.hpp"
#include "rnsc/error.hpp"
#include "rnsc/graph.hpp"
#include "rnsc/point_set.hpp"

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace rnsc {

struct Embedding {
    RowMatrix coords;                    // N x k
    Eigen::VectorXd source_eigenvalues;  // ascending
};

struct ClusterAssignment {
    Labels labels;
    RowMatrix centroids;  // k x d
    double inertia = 0.0;
    std::uint64_t seed = 0;
    /// clusters left without members at the end (only possible with duplicate points)
    int empty_clusters = 0;

    int k() const noexcept { return static_cast<int>(centroids.rows()); }
};

/// Rows are nodes, columns the bottom nonzero Laplacian eigenvectors in
/// ascending eigenvalue order. No row normalization.
inline Embedding spectral_embed(const NeighborGraph& g, int k, const EigenOptions& opt = {}) {
    if (k < 1) throw ParameterError("spectral_embed: k must be positive");
    const auto pairs = bottom_nonzero_eigenpairs(laplacian(g), k, opt);
    return {RowMatrix(pairs.vectors), pairs.values};
}

/// Embedding used for clustering and scoring. Starts from spectral_embed
/// with k clamped to the N - C nonzero eigenvalues; when the graph has C > 1
/// components the unit-norm component indicators (the Laplacian nullspace)
/// are prepended, so disconnected pieces stay apart. Connected graphs get
/// spectral_embed unchanged.
inline Embedding clustering_embedding(const NeighborGraph& g, int k, const EigenOptions& opt = {}) {
    if (k < 1) throw ParameterError("clustering_embedding: k must be positive");
    const auto comp = connected_components(g);
    const int c = count_components(comp);
    auto emb = spectral_embed(g, std::min(k, g.n() - c), opt);
    if (c == 1) return emb;

    std::vector<int> sizes(static_cast<std::size_t>(c), 0);
    for (int id : comp) ++sizes[static_cast<std::size_t>(id)];
    RowMatrix coords = RowMatrix::Zero(g.n(), c + emb.coords.cols());
    for (int i = 0; i < g.n(); ++i) coords(i, comp[i]) = 1.0 / std::sqrt(static_cast<double>(sizes[comp[i]]));
    coords.rightCols(emb.coords.cols()) = emb.coords;
    Eigen::VectorXd values = Eigen::VectorXd::Zero(c + emb.source_eigenvalues.size());
    values.tail(emb.source_eigenvalues.size()) = emb.source_eigenvalues;
    return {std::move(coords), std::move(values)};
}

struct KMeansOptions {
    int max_iter = 300;
    int n_restarts = 10;
};

namespace detail {

inline double squared_distance(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

/// Nearest centroid per point, lower index on ties; returns the inertia.
inline double assign_nearest(const RowMatrix& points, const RowMatrix& centroids, Labels& labels,
                             std::vector<double>& dist) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = squared_distance(points, i, centroids, c);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
        dist[static_cast<std::size_t>(i)] = best_d;
        inertia += best_d;
    }
    return inertia;
}

inline double inertia_of(const RowMatrix& points, const RowMatrix& centroids, const Labels& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        total += squared_distance(points, i, centroids, labels[static_cast<std::size_t>(i)]);
    }
    return total;
}

/// Greedy k-means++: each new centre is the best of 2 + floor(ln k) draws
/// sampled proportionally to squared distance from the current centres.
inline RowMatrix greedy_kmeanspp(const RowMatrix& points, int k, std::mt19937_64& rng) {
    const auto n = points.rows();
    RowMatrix centers(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));

    centers.row(0) = points.row(pick(rng));
    std::vector<double> closest(static_cast<std::size_t>(n));
    double potential = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        closest[static_cast<std::size_t>(i)] = squared_distance(points, i, centers, 0);
        potential += closest[static_cast<std::size_t>(i)];
    }

    std::vector<double> trial_closest(static_cast<std::size_t>(n));
    std::vector<double> best_closest(static_cast<std::size_t>(n));
    for (int c = 1; c < k; ++c) {
        Eigen::Index best_idx = -1;
        double best_potential = std::numeric_limits<double>::infinity();
        for (int t = 0; t < trials; ++t) {
            Eigen::Index idx = 0;
            if (potential > 0.0) {
                double target = unit(rng) * potential;
                idx = n - 1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    target -= closest[static_cast<std::size_t>(i)];
                    if (target < 0.0) {
                        idx = i;
                        break;
                    }
                }
                // never land on a zero-weight point through round-off
                while (idx > 0 && closest[static_cast<std::size_t>(idx)] == 0.0) --idx;
            } else {
                idx = pick(rng);
            }
            double pot = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = (points.row(i) - points.row(idx)).squaredNorm();
                trial_closest[static_cast<std::size_t>(i)] = std::min(closest[static_cast<std::size_t>(i)], d);
                pot += trial_closest[static_cast<std::size_t>(i)];
            }
            if (pot < best_potential) {
                best_potential = pot;
                best_idx = idx;
                best_closest.swap(trial_closest);
            }
        }
        centers.row(c) = points.row(best_idx);
        closest.swap(best_closest);
        potential = best_potential;
    }
    return centers;
}

inline ClusterAssignment lloyd(const RowMatrix& points, int k, std::mt19937_64& rng, int max_iter) {
    const auto n = points.rows();
    RowMatrix centroids = greedy_kmeanspp(points, k, rng);
    Labels labels(static_cast<std::size_t>(n), -1);
    Labels previous;
    std::vector<double> dist(static_cast<std::size_t>(n));
    std::vector<int> counts(static_cast<std::size_t>(k));
    [[maybe_unused]] double last_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        const double inertia = assign_nearest(points, centroids, labels, dist);
        assert(inertia <= last_inertia * (1.0 + 1e-12) + 1e-12);
        last_inertia = inertia;
        if (labels == previous) break;
        previous = labels;

        // re-seed empty clusters with the point farthest from its centroid
        std::fill(counts.begin(), counts.end(), 0);
        for (int l : labels) ++counts[static_cast<std::size_t>(l)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto si = static_cast<std::size_t>(i);
                if (counts[static_cast<std::size_t>(labels[si])] > 1 && dist[si] > far_d) {
                    far_d = dist[si];
                    far = i;
                }
            }
            if (far < 0) continue;
            --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
            labels[static_cast<std::size_t>(far)] = c;
            dist[static_cast<std::size_t>(far)] = 0.0;
            counts[static_cast<std::size_t>(c)] = 1;
        }

        centroids.setZero();
        for (Eigen::Index i = 0; i < n; ++i) centroids.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) centroids.row(c) /= counts[static_cast<std::size_t>(c)];
        }
        previous = labels;
    }

    ClusterAssignment out;
    out.labels = std::move(labels);
    out.centroids = std::move(centroids);
    out.inertia = inertia_of(points, out.centroids, out.labels);
    std::vector<char> used(static_cast<std::size_t>(k), 0);
    for (int l : out.labels) used[static_cast<std::size_t>(l)] = 1;
    out.empty_clusters = static_cast<int>(std::count(used.begin(), used.end(), 0));
    return out;
}

}  // namespace detail

/// Lloyd's k-means from greedy k-means++ seeds, best of `n_restarts` runs.
/// Restart r draws from a generator seeded by (seed, r), so results depend
/// only on the arguments.
inline ClusterAssignment kmeans(const RowMatrix& points, int k, std::uint64_t seed, int max_iter = 300,
                                int n_restarts = 10) {
    if (k < 1 || k > points.rows()) {
        throw ParameterError("kmeans: need 1 <= k <= N (k=" + std::to_string(k) +
                             ", N=" + std::to_string(points.rows()) + ")");
    }
    if (max_iter < 1 || n_restarts < 1) throw ParameterError("kmeans: max_iter and n_restarts must be positive");

    ClusterAssignment best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n_restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        auto run = detail::lloyd(points, k, rng, max_iter);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    best.seed = seed;
    return best;
}

struct SpectralOptions {
    Metric metric = Metric::euclidean;
    EigenOptions eigen;
    KMeansOptions kmeans;
};

/// Plain spectral clustering with per-stage wall times.
struct SpectralRun {
    ClusterAssignment assignment;
    Embedding embedding;
    double graph_seconds = 0.0;
    double eig_seconds = 0.0;
    double kmeans_seconds = 0.0;
};

/// Per-cluster means of `points` under `labels`; empty clusters stay at zero.
inline RowMatrix cluster_means(const RowMatrix& points, const Labels& labels, int k) {
    RowMatrix means = RowMatrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        means.row(l) += points.row(i);
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) /= counts[static_cast<std::size_t>(c)];
    }
    return means;
}

inline SpectralRun spectral_clustering_run(const PointSet& ps, int k_clusters, int k_nn, std::uint64_t seed,
                                           const SpectralOptions& opt = {}) {
    SpectralRun run;
    auto graph = timed([&] { return build_knn_graph(ps, k_nn, opt.metric); });
    run.graph_seconds = graph.seconds;
    auto embed = timed([&] { return clustering_embedding(graph.value, k_clusters, opt.eigen); });
    run.eig_seconds = embed.seconds;
    run.embedding = std::move(embed.value);
    auto km = timed([&] {
        return kmeans(run.embedding.coords, k_clusters, seed, opt.kmeans.max_iter, opt.kmeans.n_restarts);
    });
    run.kmeans_seconds = km.seconds;
    run.assignment = std::move(km.value);
    // report centroids where the data lives; inertia stays the embedded one
    run.assignment.centroids = cluster_means(ps.points(), run.assignment.labels, k_clusters);
    return run;
}

/// k-NN graph, clustering_embedding, k-means in the embedding.
inline ClusterAssignment spectral_clustering(const PointSet& ps, int k_clusters, int k_nn, std::uint64_t seed,
                                             const SpectralOptions& opt = {}) {
    return spectral_clustering_run(ps, k_clusters, k_nn, seed, opt).assignment;
}

}  // namespace rnsc
