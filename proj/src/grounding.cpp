#include "ersatz/grounding.hpp"

#include <algorithm>
#include <cmath>

namespace ersatz {

std::vector<double> ClusterModel::boundaries() const {
    std::vector<double> b;
    b.reserve(centroids.size() > 0 ? centroids.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < centroids.size(); ++i) {
        b.push_back(0.5 * (centroids[i] + centroids[i + 1]));
    }
    return b;
}

int ClusterModel::assign(double value) const {
    // First boundary >= value wins; equality means the tie goes to the lower
    // cluster index.
    int idx = 0;
    for (std::size_t i = 0; i + 1 < centroids.size(); ++i) {
        const double boundary = 0.5 * (centroids[i] + centroids[i + 1]);
        if (value <= boundary) return idx;
        ++idx;
    }
    return idx;
}

namespace {

// Linear interpolation at fractional position `pos` in a sorted array.
double interpolate_at(const std::vector<double>& sorted, double pos) {
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    if (hi >= sorted.size()) return sorted.back();
    if (lo == hi) return sorted[lo];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

ClusterModel subcategorize(const std::string& property,
                           const std::vector<double>& values, int eta,
                           int max_iterations) {
    if (eta < 1) {
        throw DomainError("cluster count must be >= 1, got " +
                          std::to_string(eta));
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (static_cast<int>(distinct.size()) < eta) {
        throw DegeneratePropertyError(static_cast<int>(distinct.size()));
    }

    // Quantile seeding over the distinct values keeps the seeds strictly
    // ascending even when the raw data is heavy with duplicates.
    std::vector<double> centroids(eta);
    const double span = static_cast<double>(distinct.size() - 1);
    for (int i = 0; i < eta; ++i) {
        centroids[i] = interpolate_at(distinct, (i + 0.5) / eta * span);
    }

    const std::size_t n = sorted.size();
    std::vector<int> assignment(n, -1);
    std::vector<int> previous(n, -2);

    for (int iter = 0; iter < max_iterations; ++iter) {
        // Assign: regions are intervals, so walk values and boundaries in
        // lockstep. A value exactly on a boundary stays in the lower cluster.
        int cluster = 0;
        for (std::size_t i = 0; i < n; ++i) {
            while (cluster + 1 < eta &&
                   sorted[i] > 0.5 * (centroids[cluster] +
                                      centroids[cluster + 1])) {
                ++cluster;
            }
            assignment[i] = cluster;
        }
        if (assignment == previous) break;
        previous = assignment;

        // Update: cluster means. An empty cluster keeps its centroid; the
        // interval structure keeps the sequence strictly ascending.
        std::vector<double> sum(eta, 0.0);
        std::vector<std::size_t> count(eta, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[assignment[i]] += sorted[i];
            ++count[assignment[i]];
        }
        for (int c = 0; c < eta; ++c) {
            if (count[c] > 0) {
                centroids[c] = sum[c] / static_cast<double>(count[c]);
            }
        }
    }

    return ClusterModel{property, std::move(centroids)};
}

HoldsSet attribute(const InstanceRecord& record,
                   const std::map<std::string, ClusterModel>& models) {
    HoldsSet holds;
    holds.instance_id = record.instance_id;
    for (const auto& [property, value] : record.measurements) {
        auto it = models.find(property);
        if (it == models.end()) {
            throw SchemaError("no cluster model for measured property '" +
                              property + "' on instance '" +
                              record.instance_id + "'");
        }
        holds.qualities.insert(it->second.quality(value));
    }
    return holds;
}

}  // namespace ersatz
