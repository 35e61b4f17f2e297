#pragma once

#include "rnsc/error.hpp"
#include "rnsc/point_set.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace rnsc {

/// counts(p, t) = number of points with predicted label p and true label t.
struct ConfusionMatrix {
    Eigen::MatrixXi counts;
    int n = 0;
};

inline ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size()) {
        throw ParameterError("confusion_matrix: " + std::to_string(pred.size()) + " predictions vs " +
                             std::to_string(truth.size()) + " truth labels");
    }
    if (pred.empty()) throw ParameterError("confusion_matrix: empty label vectors");
    const auto [pmin, pmax] = std::minmax_element(pred.begin(), pred.end());
    const auto [tmin, tmax] = std::minmax_element(truth.begin(), truth.end());
    if (*pmin < 0 || *tmin < 0) throw ParameterError("confusion_matrix: negative label");
    ConfusionMatrix cm;
    cm.counts = Eigen::MatrixXi::Zero(*pmax + 1, *tmax + 1);
    for (std::size_t i = 0; i < pred.size(); ++i) ++cm.counts(pred[i], truth[i]);
    cm.n = static_cast<int>(pred.size());
    return cm;
}

/// Assignment maximizing the sum of selected entries: row i takes column
/// result[i]. Runs the O(k^3) shortest-augmenting-path Hungarian method on
/// the negated matrix.
inline std::vector<int> hungarian_max_assignment(const Eigen::MatrixXd& gain) {
    if (gain.rows() != gain.cols()) {
        throw ParameterError("hungarian_max_assignment: matrix is " + std::to_string(gain.rows()) + "x" +
                             std::to_string(gain.cols()) + ", expected square");
    }
    if (!gain.allFinite()) throw ParameterError("hungarian_max_assignment: non-finite entry");
    const int n = static_cast<int>(gain.rows());
    if (n == 0) return {};
    constexpr double inf = std::numeric_limits<double>::infinity();

    // 1-based potentials; column 0 is the virtual start
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> row_of(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (int i = 1; i <= n; ++i) {
        row_of[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = row_of[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -gain(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> assignment(n);
    for (int j = 1; j <= n; ++j) assignment[row_of[j] - 1] = j - 1;
    return assignment;
}

/// Fraction of points whose predicted cluster maps onto their true label
/// under the best one-to-one cluster/label matching. Unequal label counts are
/// handled by zero-padding the confusion matrix to square.
inline double acc(std::span<const int> pred, std::span<const int> truth) {
    const auto cm = confusion_matrix(pred, truth);
    const Eigen::Index k = std::max(cm.counts.rows(), cm.counts.cols());
    Eigen::MatrixXd gain = Eigen::MatrixXd::Zero(k, k);
    gain.topLeftCorner(cm.counts.rows(), cm.counts.cols()) = cm.counts.cast<double>();
    const auto map = hungarian_max_assignment(gain);
    long long matched = 0;
    for (Eigen::Index p = 0; p < k; ++p) matched += static_cast<long long>(gain(p, map[static_cast<std::size_t>(p)]));
    return static_cast<double>(matched) / static_cast<double>(cm.n);
}

}  // namespace rnsc
