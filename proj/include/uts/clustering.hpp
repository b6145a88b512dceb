#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "uts/point_cloud.hpp"

namespace uts {

struct ClusterAssignment {
    std::vector<int> labels;
    int k = 0;
    double inertia = 0.0;
};

struct DendrogramMerge {
    int left = 0;
    int right = 0;
    double height = 0.0;
    int id = 0; // id of the merged cluster
};

struct Dendrogram {
    std::vector<DendrogramMerge> merges; // n-1 merges, heights nondecreasing
    std::size_t leaves = 0;

    // Labels from cutting the tree into `clusters` groups.
    std::vector<int> cut(std::size_t clusters) const;
};

// Lloyd iterations with k-means++ seeding; empty clusters are reseeded to the
// farthest point. Deterministic given seed.
ClusterAssignment kmeans(const PointCloud& cloud, std::size_t k, std::uint64_t seed);

// Mean silhouette over points; singleton clusters contribute 0.
double silhouette(const PointCloud& cloud, const ClusterAssignment& labels,
                  Metric metric);

struct SilhouettePick {
    std::size_t k_star = 0;
    double score = 0.0;
};

// Runs kmeans + silhouette for each candidate k (values > n are skipped);
// ties resolve to the smaller k.
SilhouettePick best_silhouette(const PointCloud& cloud,
                               const std::vector<std::size_t>& k_set,
                               std::uint64_t seed, Metric metric);

inline std::vector<std::size_t> default_silhouette_k_set() {
    return {3, 5, 10, 20, 50, 100};
}

// UPGMA over a symmetric zero-diagonal distance matrix; ties break toward the
// smallest pair indices.
Dendrogram average_linkage(const Eigen::MatrixXd& distances);

} // namespace uts
