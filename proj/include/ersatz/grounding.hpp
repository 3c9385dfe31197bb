#pragma once

#include <map>
#include <string>
#include <vector>

#include "ersatz/core.hpp"

namespace ersatz {

// Sub-categorization result for one property: eta centroids in ascending
// order. Assignment regions are delimited by the midpoints between adjacent
// centroids, so cluster_index is ordinal in the measured quantity.
struct ClusterModel {
    std::string property;
    std::vector<double> centroids;  // strictly ascending

    int eta() const { return static_cast<int>(centroids.size()); }

    // Midpoints between adjacent centroids (eta - 1 values).
    std::vector<double> boundaries() const;

    // Index of the nearest centroid; a value exactly on a boundary midpoint
    // goes to the lower index.
    int assign(double value) const;

    QualityLabel quality(double value) const {
        return QualityLabel{property, assign(value)};
    }

    bool operator==(const ClusterModel&) const = default;
};

// 1-D k-means (Lloyd) with quantile seeding: initial centroids are placed at
// the (i+0.5)/eta quantiles of the distinct sorted values, then iterated to
// an assignment fixed point (at most `max_iterations` rounds). The input
// order does not affect the result; values are sorted internally.
//
// Throws DegeneratePropertyError when there are fewer distinct values than
// eta. eta == 1 is accepted to support the caller's degeneracy retry; the
// config-level eta stays >= 2.
ClusterModel subcategorize(const std::string& property,
                           const std::vector<double>& values, int eta,
                           int max_iterations = 300);

// Assigns each measured property of the record its quality. Unmeasured
// properties contribute nothing. Throws SchemaError when a measured property
// has no ClusterModel.
HoldsSet attribute(const InstanceRecord& record,
                   const std::map<std::string, ClusterModel>& models);

}  // namespace ersatz
