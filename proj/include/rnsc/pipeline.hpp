#pragma once

// Robust-node spectral clustering:
//   1. score every point with robustness_report on the full data set;
//   2. keep the m_nodes lowest-scoring points;
//   3. run plain spectral clustering on that subset alone (fresh k-NN graph,
//      its own eigendecomposition);
//   4. take per-cluster means of the robust points in feature space;
//   5. give every other point the label of its nearest centroid.

#include "rnsc/clustering.hpp"
#include "rnsc/error.hpp"
#include "rnsc/point_set.hpp"
#include "rnsc/spade.hpp"

#include <chrono>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rnsc {

/// Stage names in the order the pipeline runs them.
inline const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {
        "graph_input", "embed_full_or_subset", "spade", "subset_graph", "subset_eig", "kmeans", "assign", "total",
    };
    return stages;
}

using StageTimes = std::vector<std::pair<std::string, double>>;

struct RobustClusteringResult {
    Labels full_labels;
    NodeIds robust_ids;                   // sorted
    ClusterAssignment robust_assignment;  // indexed like robust_ids
    RowMatrix centroids;                  // k x d, feature space
    SpadeReport spade;
    StageTimes timings;

    double seconds(const std::string& stage) const {
        for (const auto& [name, s] : timings) {
            if (name == stage) return s;
        }
        return 0.0;
    }
};

/// Nearest centroid (Euclidean) for each target node, lower index on ties.
inline Labels centroid_assign(const RowMatrix& centroids, const PointSet& ps, std::span<const int> targets) {
    if (centroids.cols() != ps.dim()) {
        throw ParameterError("centroid_assign: centroids have " + std::to_string(centroids.cols()) +
                             " columns, points have " + std::to_string(ps.dim()));
    }
    if (centroids.rows() < 1) throw ParameterError("centroid_assign: no centroids");
    Labels out;
    out.reserve(targets.size());
    for (int node : targets) {
        if (node < 0 || node >= ps.size()) throw ParameterError("centroid_assign: node id out of range");
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = (ps.points().row(node) - centroids.row(c)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        out.push_back(best);
    }
    return out;
}

struct PipelineOptions {
    Metric metric = Metric::euclidean;
    /// eigenpairs used for scoring; 0 means k_clusters
    int m_eigs = 0;
    /// neighbours for the embedded-space graph; 0 means k_nn
    int k_nn_output = 0;
    EigenOptions eigen;
    KMeansOptions kmeans;

    SpectralOptions spectral() const { return {metric, eigen, kmeans}; }
    SpadeOptions spade() const { return {metric, k_nn_output, eigen}; }
};

inline RobustClusteringResult robust_spectral_clustering(const PointSet& ps, int k_clusters, int k_nn, int m_nodes,
                                                         std::uint64_t seed, const PipelineOptions& opt = {}) {
    if (m_nodes < 1 || m_nodes > ps.size()) {
        throw ParameterError("robust_spectral_clustering: m_nodes=" + std::to_string(m_nodes) + " outside 1.." +
                             std::to_string(ps.size()));
    }
    if (m_nodes < k_clusters) {
        throw ParameterError("robust_spectral_clustering: m_nodes=" + std::to_string(m_nodes) +
                             " is smaller than k_clusters=" + std::to_string(k_clusters));
    }
    const auto start = std::chrono::steady_clock::now();
    const int m_eigs = opt.m_eigs > 0 ? opt.m_eigs : k_clusters;

    RobustClusteringResult out;
    auto spade = robustness_run(ps, k_nn, k_clusters, m_eigs, opt.spade());
    out.spade = std::move(spade.report);
    out.robust_ids = select_robust(out.spade, m_nodes);

    const PointSet robust = ps.subset(out.robust_ids);
    // the subset needs k_nn < m_nodes
    const int subset_k = std::min(k_nn, m_nodes - 1);
    SpectralRun sub;
    if (subset_k >= 1) {
        sub = spectral_clustering_run(robust, k_clusters, subset_k, seed, opt.spectral());
    } else {
        sub.assignment = kmeans(robust.points(), k_clusters, seed, opt.kmeans.max_iter, opt.kmeans.n_restarts);
    }
    out.robust_assignment = sub.assignment;
    out.centroids = sub.assignment.centroids;

    auto assigned = timed([&] {
        std::vector<char> is_robust(static_cast<std::size_t>(ps.size()), 0);
        for (int id : out.robust_ids) is_robust[static_cast<std::size_t>(id)] = 1;
        NodeIds rest;
        for (int i = 0; i < ps.size(); ++i) {
            if (!is_robust[static_cast<std::size_t>(i)]) rest.push_back(i);
        }
        Labels labels(static_cast<std::size_t>(ps.size()), -1);
        for (std::size_t r = 0; r < out.robust_ids.size(); ++r) {
            labels[static_cast<std::size_t>(out.robust_ids[r])] = out.robust_assignment.labels[r];
        }
        const auto rest_labels = centroid_assign(out.centroids, ps, rest);
        for (std::size_t r = 0; r < rest.size(); ++r) labels[static_cast<std::size_t>(rest[r])] = rest_labels[r];
        return labels;
    });
    out.full_labels = std::move(assigned.value);

    const std::chrono::duration<double> total = std::chrono::steady_clock::now() - start;
    out.timings = {
        {"graph_input", spade.graph_seconds},
        {"embed_full_or_subset", spade.embed_seconds},
        {"spade", spade.spade_seconds},
        {"subset_graph", sub.graph_seconds},
        {"subset_eig", sub.eig_seconds},
        {"kmeans", sub.kmeans_seconds},
        {"assign", assigned.seconds},
        {"total", total.count()},
    };
    return out;
}

}  // namespace rnsc
