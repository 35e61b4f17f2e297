#pragma once

// Per-node robustness scoring by input/output manifold distortion.
//
// G_input is the k-NN graph of the raw points, G_output the k-NN graph of
// their spectral embedding. The largest generalized eigenpairs (lambda_j, v_j)
// of pinv(L_output) L_input give V = [v_1 sqrt(lambda_1), ..., v_m sqrt(lambda_m)],
// and node i scores the mean of ||V^T (e_i - e_j)||^2 over its G_input
// neighbours j. Low scores mark nodes whose neighbourhoods survive the
// embedding intact.

#include "rnsc/clustering.hpp"
#include "rnsc/eigen.hpp"
#include "rnsc/error.hpp"
#include "rnsc/graph.hpp"
#include "rnsc/point_set.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

namespace rnsc {

struct SpadeReport {
    Eigen::VectorXd scores;       // length N, >= 0
    RowMatrix vk;                 // N x m
    Eigen::VectorXd eigenvalues;  // descending, length m
    NodeIds ranking;              // node ids by ascending score, ties by id

    int size() const noexcept { return static_cast<int>(scores.size()); }
};

/// Column j = eigenvector j scaled by sqrt(eigenvalue j).
inline RowMatrix build_vk(const EigenPairs& pairs) {
    RowMatrix vk(pairs.vectors.rows(), pairs.vectors.cols());
    for (Eigen::Index j = 0; j < pairs.values.size(); ++j) {
        const double lambda = pairs.values(j);
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw NumericalError("build_vk: eigenvalue " + std::to_string(j) + " is " + std::to_string(lambda));
        }
        vk.col(j) = pairs.vectors.col(j) * std::sqrt(lambda);
    }
    return vk;
}

/// Mean squared row distance of V over each node's symmetrized neighbours.
inline Eigen::VectorXd spade_scores(const NeighborGraph& g_input, const RowMatrix& vk) {
    if (vk.rows() != g_input.n()) {
        throw ParameterError("spade_scores: V has " + std::to_string(vk.rows()) + " rows, graph has " +
                             std::to_string(g_input.n()) + " nodes");
    }
    Eigen::VectorXd scores(g_input.n());
    for (int i = 0; i < g_input.n(); ++i) {
        const auto& nbrs = g_input.neighbors(i);
        if (nbrs.empty()) throw ContractError("spade_scores: node " + std::to_string(i) + " has no neighbours");
        double sum = 0.0;
        for (const auto& nb : nbrs) sum += (vk.row(i) - vk.row(nb.id)).squaredNorm();
        scores(i) = sum / static_cast<double>(nbrs.size());
    }
    return scores;
}

/// Node ids ordered by ascending score; stable, so ties keep id order.
inline NodeIds rank_ascending(const Eigen::VectorXd& scores) {
    NodeIds order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });
    return order;
}

struct SpadeOptions {
    Metric metric = Metric::euclidean;
    /// neighbours for the embedded-space graph; 0 reuses k_nn
    int k_nn_output = 0;
    EigenOptions eigen;
};

/// Intermediate timings of robustness_report.
struct SpadeRun {
    SpadeReport report;
    NeighborGraph g_input;
    double graph_seconds = 0.0;     // G_input construction
    double embed_seconds = 0.0;     // full-size spectral embedding
    double spade_seconds = 0.0;     // G_output, generalized eigenpairs, scores
    double generalized_eig_seconds = 0.0;
};

inline SpadeRun robustness_run(const PointSet& ps, int k_nn, int k_clusters, int m_eigs,
                               const SpadeOptions& opt = {}) {
    if (k_clusters < 1 || m_eigs < 1) throw ParameterError("robustness_report: k_clusters and m_eigs must be positive");
    SpadeRun run;
    auto g_in = timed([&] { return build_knn_graph(ps, k_nn, opt.metric); });
    run.graph_seconds = g_in.seconds;
    run.g_input = std::move(g_in.value);

    auto embedding = timed([&] { return clustering_embedding(run.g_input, k_clusters, opt.eigen); });
    run.embed_seconds = embedding.seconds;

    const auto start = std::chrono::steady_clock::now();
    const int k_out = opt.k_nn_output > 0 ? opt.k_nn_output : k_nn;
    const auto g_out = build_knn_graph(embedding.value.coords, k_out, Metric::euclidean);
    auto pairs = timed([&] {
        return generalized_top_eigenpairs(laplacian(run.g_input), laplacian(g_out), m_eigs, opt.eigen);
    });
    run.generalized_eig_seconds = pairs.seconds;
    run.report.eigenvalues = pairs.value.values;
    run.report.vk = build_vk(pairs.value);
    run.report.scores = spade_scores(run.g_input, run.report.vk);
    run.report.ranking = rank_ascending(run.report.scores);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    run.spade_seconds = elapsed.count();
    return run;
}

/// Scores every point of `ps` and ranks them from most to least robust.
inline SpadeReport robustness_report(const PointSet& ps, int k_nn, int k_clusters, int m_eigs,
                                     const SpadeOptions& opt = {}) {
    return robustness_run(ps, k_nn, k_clusters, m_eigs, opt).report;
}

/// The m_nodes lowest-scoring nodes, returned in increasing id order.
inline NodeIds select_robust(const SpadeReport& report, int m_nodes) {
    if (m_nodes < 1 || m_nodes > report.size()) {
        throw ParameterError("select_robust: m_nodes=" + std::to_string(m_nodes) + " outside 1.." +
                             std::to_string(report.size()));
    }
    NodeIds ids(report.ranking.begin(), report.ranking.begin() + m_nodes);
    std::sort(ids.begin(), ids.end());
    return ids;
}

/// Writes `node_id,score,rank` rows (rank 0 = most robust) to `csv_path`
/// and the eigenvalues, one per line, to `eigen_path`.
inline void write_spade_report(const SpadeReport& report, const std::filesystem::path& csv_path,
                               const std::filesystem::path& eigen_path) {
    std::vector<int> rank(static_cast<std::size_t>(report.size()));
    for (std::size_t r = 0; r < report.ranking.size(); ++r) rank[static_cast<std::size_t>(report.ranking[r])] = static_cast<int>(r);
    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot write " + csv_path.string());
    csv.precision(17);
    csv << "node_id,score,rank\n";
    for (int i = 0; i < report.size(); ++i) csv << i << ',' << report.scores(i) << ',' << rank[static_cast<std::size_t>(i)] << '\n';

    std::ofstream eig(eigen_path);
    if (!eig) throw Error("cannot write " + eigen_path.string());
    eig.precision(17);
    for (Eigen::Index j = 0; j < report.eigenvalues.size(); ++j) eig << report.eigenvalues(j) << '\n';
}

}  // namespace rnsc
