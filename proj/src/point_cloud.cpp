#include "uts/point_cloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "uts/error.hpp"
#include "uts/rng.hpp"

namespace uts {

std::string metric_name(Metric m) {
    return m == Metric::Euclidean ? "euclidean" : "cosine";
}

Metric metric_from_name(const std::string& name) {
    if (name == "euclidean") return Metric::Euclidean;
    if (name == "cosine") return Metric::CosineDistance;
    fail(ErrorKind::Parse, "unknown metric '" + name + "'");
}

namespace {

constexpr char kMagic[4] = {'U', 'T', 'S', 'E'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "UTSE io assumes a little-endian host");

template <typename T>
bool read_pod(std::istream& in, T& out) {
    in.read(reinterpret_cast<char*>(&out), sizeof(T));
    return static_cast<bool>(in);
}

PointCloud load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");

    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        fail(ErrorKind::Parse, path + ": bad magic at byte 0, expected 'UTSE'");
    std::uint32_t version;
    if (!read_pod(in, version) || version != kVersion)
        fail(ErrorKind::Parse, path + ": unsupported UTSE version at byte 4");
    std::uint64_t n, d;
    if (!read_pod(in, n) || !read_pod(in, d))
        fail(ErrorKind::Parse, path + ": truncated header at byte 8");
    if (n < 1 || d < 1)
        fail(ErrorKind::Parse, path + ": header declares empty cloud (n=" +
                                   std::to_string(n) + ", D=" + std::to_string(d) + ")");

    PointCloud cloud;
    cloud.data.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<float> row(d);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!in.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(d * sizeof(float)))) {
            const auto offset = 24 + i * d * sizeof(float);
            fail(ErrorKind::Parse,
                 path + ": truncated payload near byte " + std::to_string(offset));
        }
        for (std::uint64_t j = 0; j < d; ++j) {
            if (!std::isfinite(row[j]))
                fail(ErrorKind::Parse, path + ": non-finite value at row " +
                                           std::to_string(i) + ", col " + std::to_string(j));
            cloud.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
    }
    return cloud;
}

PointCloud load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            const std::string cell = line.substr(pos, comma - pos);
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(cell, &used);
            } catch (const std::exception&) {
                fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                           ": cannot parse '" + cell + "'");
            }
            if (used != cell.size() || !std::isfinite(value))
                fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                           ": invalid value '" + cell + "'");
            row.push_back(value);
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorKind::Parse,
                 path + ":" + std::to_string(lineno) + ": row has " +
                     std::to_string(row.size()) + " values, expected " +
                     std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorKind::Parse, path + ": no data rows");

    PointCloud cloud;
    cloud.data.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            cloud.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
    return cloud;
}

} // namespace

EmbeddingFormat detect_format(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".utse")
        return EmbeddingFormat::Binary;
    return EmbeddingFormat::Csv;
}

PointCloud load_embeddings(const std::string& path, EmbeddingFormat format) {
    PointCloud cloud = format == EmbeddingFormat::Binary ? load_binary(path)
                                                         : load_csv(path);
    cloud.id = path;
    return cloud;
}

void save_embeddings(const PointCloud& cloud, const std::string& path,
                     EmbeddingFormat format) {
    if (format == EmbeddingFormat::Binary) {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorKind::Parse, "cannot write '" + path + "'");
        out.write(kMagic, 4);
        const std::uint32_t version = kVersion;
        const std::uint64_t n = static_cast<std::uint64_t>(cloud.rows());
        const std::uint64_t d = static_cast<std::uint64_t>(cloud.dim());
        out.write(reinterpret_cast<const char*>(&version), sizeof(version));
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        out.write(reinterpret_cast<const char*>(&d), sizeof(d));
        for (Eigen::Index i = 0; i < cloud.rows(); ++i)
            for (Eigen::Index j = 0; j < cloud.dim(); ++j) {
                const float v = static_cast<float>(cloud.data(i, j));
                out.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
    } else {
        std::ofstream out(path);
        if (!out) fail(ErrorKind::Parse, "cannot write '" + path + "'");
        out.precision(17);
        for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
            for (Eigen::Index j = 0; j < cloud.dim(); ++j) {
                if (j) out << ',';
                out << cloud.data(i, j);
            }
            out << '\n';
        }
    }
}

PointCloud normalize_rows(const PointCloud& cloud) {
    PointCloud out;
    out.id = cloud.id;
    out.data = cloud.data;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = out.data.row(i).norm();
        if (norm == 0.0)
            fail(ErrorKind::Degenerate,
                 "zero-norm row " + std::to_string(i) + " cannot be normalized");
        out.data.row(i) /= norm;
    }
    return out;
}

std::vector<std::size_t> sample_indices(std::size_t n, const SampleSpec& spec) {
    if (spec.size < 1) fail(ErrorKind::Bounds, "sample size must be >= 1");
    const std::size_t m = std::min(spec.size, n);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(spec.seed);
    // Partial Fisher-Yates: the first m slots are the sample.
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

PointCloud sample(const PointCloud& cloud, const SampleSpec& spec) {
    const auto idx = sample_indices(static_cast<std::size_t>(cloud.rows()), spec);
    PointCloud out;
    out.id = cloud.id;
    out.data.resize(static_cast<Eigen::Index>(idx.size()), cloud.dim());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.data.row(static_cast<Eigen::Index>(i)) =
            cloud.data.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

double point_distance(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                      Metric metric) {
    if (metric == Metric::Euclidean) return (x - y).norm();
    const double nx = x.norm();
    const double ny = y.norm();
    if (nx == 0.0 || ny == 0.0)
        fail(ErrorKind::Degenerate, "cosine distance undefined for zero vector");
    return 1.0 - x.dot(y) / (nx * ny);
}

namespace {

DistanceMatrix fill_distances(const PointCloud& cloud, Metric metric, bool parallel) {
    const Eigen::Index n = cloud.rows();
    if (n < 1) fail(ErrorKind::Degenerate, "empty cloud");

    Eigen::VectorXd norms(n);
    if (metric == Metric::CosineDistance) {
        for (Eigen::Index i = 0; i < n; ++i) {
            norms(i) = cloud.data.row(i).norm();
            if (norms(i) == 0.0)
                fail(ErrorKind::Degenerate,
                     "cosine distance undefined for zero row " + std::to_string(i));
        }
    }

    DistanceMatrix dm;
    dm.metric = metric;
    dm.d.resize(n, n);

    // Each row is computed independently; output is bit-identical for any
    // worker count.
#pragma omp parallel for schedule(static) if (parallel)
    for (Eigen::Index i = 0; i < n; ++i) {
        dm.d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v =
                metric == Metric::Euclidean
                    ? (cloud.data.row(i) - cloud.data.row(j)).norm()
                    : 1.0 - cloud.data.row(i).dot(cloud.data.row(j)) /
                                (norms(i) * norms(j));
            dm.d(i, j) = v;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) dm.d(j, i) = dm.d(i, j);
    return dm;
}

} // namespace

DistanceMatrix pairwise_distances(const PointCloud& cloud, Metric metric) {
    return fill_distances(cloud, metric, true);
}

DistanceMatrix detail::pairwise_distances_serial(const PointCloud& cloud,
                                                 Metric metric) {
    return fill_distances(cloud, metric, false);
}

std::vector<std::size_t> knn(const PointCloud& cloud, std::size_t anchor,
                             std::size_t k, Metric metric) {
    const std::size_t n = static_cast<std::size_t>(cloud.rows());
    if (anchor >= n) fail(ErrorKind::Bounds, "anchor index out of range");
    if (k < 1 || k >= n)
        fail(ErrorKind::Bounds, "knn requires 1 <= k <= n-1, got k=" +
                                    std::to_string(k) + " with n=" + std::to_string(n));

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == anchor) continue;
        scored.emplace_back(
            point_distance(cloud.data.row(static_cast<Eigen::Index>(anchor)),
                           cloud.data.row(static_cast<Eigen::Index>(i)), metric),
            i);
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                      scored.end()); // pair ordering breaks ties by lower index
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = scored[i].second;
    return out;
}

} // namespace uts
