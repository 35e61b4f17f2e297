#pragma once

#include "rnsc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rnsc {

/// Row-major dense matrix; one point (or one node) per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<int>;
using NodeIds = std::vector<int>;

/// N x d feature matrix with optional dense ground-truth labels.
///
/// Immutable after construction. Labels, when present, are always encoded
/// as 0..C-1; `label_names()` keeps the original value of each class id.
class PointSet {
public:
    PointSet(RowMatrix points, std::optional<Labels> labels = std::nullopt,
             std::string name = {}, std::vector<std::string> label_names = {})
        : points_(std::move(points)),
          labels_(std::move(labels)),
          name_(std::move(name)),
          label_names_(std::move(label_names)) {
        validate();
    }

    const RowMatrix& points() const noexcept { return points_; }
    const std::optional<Labels>& labels() const noexcept { return labels_; }
    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& label_names() const noexcept { return label_names_; }

    int size() const noexcept { return static_cast<int>(points_.rows()); }
    int dim() const noexcept { return static_cast<int>(points_.cols()); }

    /// Number of classes, 0 when unlabeled.
    int num_classes() const {
        if (!labels_) return 0;
        return *std::max_element(labels_->begin(), labels_->end()) + 1;
    }

    /// Rows `ids` in the given order; labels are carried over but not re-encoded.
    PointSet subset(std::span<const int> ids) const {
        RowMatrix sub(static_cast<Eigen::Index>(ids.size()), points_.cols());
        std::optional<Labels> sub_labels;
        if (labels_) sub_labels.emplace();
        for (std::size_t r = 0; r < ids.size(); ++r) {
            const int id = ids[r];
            if (id < 0 || id >= size()) {
                throw ParameterError("subset: node id " + std::to_string(id) + " out of range");
            }
            sub.row(static_cast<Eigen::Index>(r)) = points_.row(id);
            if (labels_) sub_labels->push_back((*labels_)[static_cast<std::size_t>(id)]);
        }
        if (sub_labels && !sub_labels->empty()) {
            // keep the class-count invariant: shrink to ids actually present
            return PointSet(std::move(sub), densify(*sub_labels), name_ + "[subset]");
        }
        return PointSet(std::move(sub), std::nullopt, name_ + "[subset]");
    }

private:
    static Labels densify(const Labels& labels) {
        Labels sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        Labels out;
        out.reserve(labels.size());
        for (int l : labels) {
            out.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), l) -
                                           sorted.begin()));
        }
        return out;
    }

    void validate() const {
        if (points_.rows() < 1 || points_.cols() < 1) {
            throw ParameterError("PointSet needs N >= 1 and d >= 1");
        }
        if (!points_.allFinite()) {
            throw ParameterError("PointSet contains NaN or Inf");
        }
        if (!labels_) return;
        if (labels_->size() != static_cast<std::size_t>(points_.rows())) {
            throw ConsistencyError("PointSet: " + std::to_string(labels_->size()) +
                                   " labels for " + std::to_string(points_.rows()) + " points");
        }
        const int top = *std::max_element(labels_->begin(), labels_->end());
        std::vector<char> seen(static_cast<std::size_t>(top) + 1, 0);
        for (int l : *labels_) {
            if (l < 0) throw ParameterError("PointSet: negative label");
            seen[static_cast<std::size_t>(l)] = 1;
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
            throw ParameterError("PointSet: labels are not dense 0..C-1");
        }
    }

    RowMatrix points_;
    std::optional<Labels> labels_;
    std::string name_;
    std::vector<std::string> label_names_;
};

}  // namespace rnsc
