#include "uts/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uts/error.hpp"
#include "uts/rng.hpp"

namespace uts {

namespace {

double squared_distance(const Eigen::MatrixXd& data, Eigen::Index row,
                        const Eigen::RowVectorXd& center) {
    return (data.row(row) - center).squaredNorm();
}

// k-means++ seeding: first center uniform, later centers proportional to the
// squared distance to the nearest chosen center.
Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& data, std::size_t k,
                             std::mt19937_64& rng) {
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), data.cols());
    centers.row(0) = data.row(static_cast<Eigen::Index>(bounded(rng, n)));

    Eigen::VectorXd best_sq(n);
    for (Eigen::Index i = 0; i < n; ++i)
        best_sq(i) = squared_distance(data, i, centers.row(0));

    for (std::size_t c = 1; c < k; ++c) {
        const double total = best_sq.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double cumulative = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                cumulative += best_sq(i);
                if (cumulative >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<Eigen::Index>(bounded(rng, n));
        }
        centers.row(static_cast<Eigen::Index>(c)) = data.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i)
            best_sq(i) = std::min(best_sq(i),
                                  squared_distance(data, i, centers.row(
                                                               static_cast<Eigen::Index>(c))));
    }
    return centers;
}

} // namespace

ClusterAssignment kmeans(const PointCloud& cloud, std::size_t k, std::uint64_t seed) {
    const Eigen::Index n = cloud.rows();
    if (k < 2 || k > static_cast<std::size_t>(n))
        fail(ErrorKind::Bounds, "kmeans requires 2 <= k <= n, got k=" +
                                    std::to_string(k) + " with n=" + std::to_string(n));

    std::mt19937_64 rng(seed);
    Eigen::MatrixXd centers = seed_centers(cloud.data, k, rng);

    ClusterAssignment assignment;
    assignment.k = static_cast<int>(k);
    assignment.labels.assign(static_cast<std::size_t>(n), 0);

    constexpr int kMaxIterations = 300;
    constexpr double kShiftTolerance = 1e-6;

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        // Assignment step; ties go to the lower cluster id.
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(
                    cloud.data, i, centers.row(static_cast<Eigen::Index>(c)));
                if (d < best) {
                    best = d;
                    best_c = static_cast<int>(c);
                }
            }
            assignment.labels[static_cast<std::size_t>(i)] = best_c;
        }

        // Update step with empty-cluster repair: reseed to the point farthest
        // from its assigned center.
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(centers.rows(), centers.cols());
        std::vector<std::size_t> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assignment.labels[
                static_cast<std::size_t>(i)]);
            next.row(static_cast<Eigen::Index>(c)) += cloud.data.row(i);
            ++counts[c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                next.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
            } else {
                Eigen::Index farthest = 0;
                double worst = -1.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto ci = static_cast<std::size_t>(
                        assignment.labels[static_cast<std::size_t>(i)]);
                    const double d = squared_distance(
                        cloud.data, i, centers.row(static_cast<Eigen::Index>(ci)));
                    if (d > worst) {
                        worst = d;
                        farthest = i;
                    }
                }
                next.row(static_cast<Eigen::Index>(c)) = cloud.data.row(farthest);
                assignment.labels[static_cast<std::size_t>(farthest)] =
                    static_cast<int>(c);
            }
        }

        const double shift = (next - centers).rowwise().norm().maxCoeff();
        centers = next;
        if (shift < kShiftTolerance) break;
    }

    assignment.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        assignment.inertia += squared_distance(
            cloud.data, i,
            centers.row(assignment.labels[static_cast<std::size_t>(i)]));
    return assignment;
}

double silhouette(const PointCloud& cloud, const ClusterAssignment& assignment,
                  Metric metric) {
    const Eigen::Index n = cloud.rows();
    if (n < 2) fail(ErrorKind::Degenerate, "silhouette needs at least 2 points");
    if (assignment.k < 2)
        fail(ErrorKind::Degenerate, "silhouette undefined for a single cluster");
    if (assignment.labels.size() != static_cast<std::size_t>(n))
        fail(ErrorKind::Schema, "label count does not match cloud size");

    const std::size_t k = static_cast<std::size_t>(assignment.k);
    std::vector<std::size_t> cluster_size(k, 0);
    for (int label : assignment.labels) {
        if (label < 0 || label >= assignment.k)
            fail(ErrorKind::Schema, "cluster label out of range");
        ++cluster_size[static_cast<std::size_t>(label)];
    }

    const DistanceMatrix dm = pairwise_distances(cloud, metric);

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ci = static_cast<std::size_t>(
            assignment.labels[static_cast<std::size_t>(i)]);
        if (cluster_size[ci] <= 1) continue; // singleton convention: s_i = 0

        std::vector<double> sum_to(k, 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            sum_to[static_cast<std::size_t>(
                assignment.labels[static_cast<std::size_t>(j)])] += dm.d(i, j);
        }
        const double a = sum_to[ci] / static_cast<double>(cluster_size[ci] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == ci || cluster_size[c] == 0) continue;
            b = std::min(b, sum_to[c] / static_cast<double>(cluster_size[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

SilhouettePick best_silhouette(const PointCloud& cloud,
                               const std::vector<std::size_t>& k_set,
                               std::uint64_t seed, Metric metric) {
    const auto n = static_cast<std::size_t>(cloud.rows());
    SilhouettePick best;
    bool found = false;
    for (std::size_t k : k_set) {
        if (k > n || k < 2) continue; // skipping rule
        const ClusterAssignment assignment = kmeans(cloud, k, derive_seed(seed, k));
        const double score = silhouette(cloud, assignment, metric);
        if (!found || score > best.score) {
            best.k_star = k;
            best.score = score;
            found = true;
        }
    }
    if (!found)
        fail(ErrorKind::Bounds, "no candidate k fits a cloud of " +
                                    std::to_string(n) + " points");
    return best;
}

std::vector<int> Dendrogram::cut(std::size_t clusters) const {
    const std::size_t n = leaves;
    if (clusters < 1 || clusters > n)
        fail(ErrorKind::Bounds, "cut size out of range");

    // Replay merges until `clusters` groups remain.
    std::vector<int> group(2 * n - 1, -1);
    for (std::size_t i = 0; i < n; ++i) group[i] = static_cast<int>(i);
    std::size_t remaining = n;
    std::vector<int> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int x) {
        while (parent[static_cast<std::size_t>(x)] != x)
            x = parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    for (const auto& merge : merges) {
        if (remaining == clusters) break;
        parent[static_cast<std::size_t>(find(merge.left))] = merge.id;
        parent[static_cast<std::size_t>(find(merge.right))] = merge.id;
        --remaining;
    }
    std::vector<int> labels(n);
    std::vector<int> relabel(2 * n - 1, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int root = find(static_cast<int>(i));
        if (relabel[static_cast<std::size_t>(root)] < 0)
            relabel[static_cast<std::size_t>(root)] = next++;
        labels[i] = relabel[static_cast<std::size_t>(root)];
    }
    return labels;
}

Dendrogram average_linkage(const Eigen::MatrixXd& distances) {
    const Eigen::Index n = distances.rows();
    if (n != distances.cols() || n < 1)
        fail(ErrorKind::Schema, "distance matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (distances(i, i) != 0.0)
            fail(ErrorKind::Schema, "distance matrix diagonal must be zero");
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (distances(i, j) != distances(j, i))
                fail(ErrorKind::Schema, "distance matrix must be symmetric");
    }

    Dendrogram tree;
    tree.leaves = static_cast<std::size_t>(n);
    if (n == 1) return tree;

    // Active clusters keyed by id; UPGMA updates distances by size-weighted
    // averaging.
    struct Cluster {
        int id;
        std::size_t size;
    };
    std::vector<Cluster> active;
    for (Eigen::Index i = 0; i < n; ++i)
        active.push_back({static_cast<int>(i), 1});

    Eigen::MatrixXd d = distances;
    std::vector<int> slot_of(2 * static_cast<std::size_t>(n) - 1);
    std::iota(slot_of.begin(), slot_of.end(), 0);

    int next_id = static_cast<int>(n);
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < active.size(); ++i)
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double v = d(slot_of[static_cast<std::size_t>(active[i].id)],
                                   slot_of[static_cast<std::size_t>(active[j].id)]);
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }

        const Cluster left = active[bi];
        const Cluster right = active[bj];
        tree.merges.push_back({left.id, right.id, best, next_id});

        const int left_slot = slot_of[static_cast<std::size_t>(left.id)];
        const int right_slot = slot_of[static_cast<std::size_t>(right.id)];
        const double wl = static_cast<double>(left.size);
        const double wr = static_cast<double>(right.size);
        for (const auto& other : active) {
            if (other.id == left.id || other.id == right.id) continue;
            const int os = slot_of[static_cast<std::size_t>(other.id)];
            const double merged =
                (wl * d(left_slot, os) + wr * d(right_slot, os)) / (wl + wr);
            d(left_slot, os) = merged;
            d(os, left_slot) = merged;
        }
        slot_of[static_cast<std::size_t>(next_id)] = left_slot;

        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active[bi] = {next_id, left.size + right.size};
        ++next_id;
    }
    return tree;
}

} // namespace uts
