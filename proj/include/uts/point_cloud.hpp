#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uts {

enum class Metric { Euclidean, CosineDistance };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// A finite embedding point cloud: n rows of D coordinates.
struct PointCloud {
    Eigen::MatrixXd data; // n x D
    std::optional<std::string> id;

    Eigen::Index rows() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
};

struct DistanceMatrix {
    Eigen::MatrixXd d; // n x n, symmetric, zero diagonal
    Metric metric = Metric::Euclidean;

    Eigen::Index size() const { return d.rows(); }
};

struct SampleSpec {
    std::size_t size = 1;
    std::uint64_t seed = 0;
};

// --- ingestion -------------------------------------------------------------

// Binary "UTSE" format: magic 'UTSE', u32 version = 1, u64 n, u64 D,
// then n*D little-endian float32, row-major.
enum class EmbeddingFormat { Binary, Csv };

PointCloud load_embeddings(const std::string& path, EmbeddingFormat format);
void save_embeddings(const PointCloud& cloud, const std::string& path,
                     EmbeddingFormat format);

// Detects the format from the file extension (.utse -> binary, else csv).
EmbeddingFormat detect_format(const std::string& path);

// --- operations ------------------------------------------------------------

PointCloud normalize_rows(const PointCloud& cloud);

// Sampling without replacement, seeded Fisher-Yates over indices.
// Returns min(spec.size, n) rows; deterministic given (cloud, spec).
PointCloud sample(const PointCloud& cloud, const SampleSpec& spec);
std::vector<std::size_t> sample_indices(std::size_t n, const SampleSpec& spec);

double point_distance(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                      Metric metric);

DistanceMatrix pairwise_distances(const PointCloud& cloud, Metric metric);

// Exact brute-force k nearest neighbors of `anchor` (excluded from the
// result), ties broken by lower index.
std::vector<std::size_t> knn(const PointCloud& cloud, std::size_t anchor,
                             std::size_t k, Metric metric);

namespace detail {
// Serial reference for the OpenMP distance-matrix fill, kept for tests and
// the benchmark target.
DistanceMatrix pairwise_distances_serial(const PointCloud& cloud, Metric metric);
} // namespace detail

} // namespace uts
