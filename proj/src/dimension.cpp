#include "uts/dimension.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "uts/error.hpp"

namespace uts {

SpectrumSummary covariance_spectrum(const PointCloud& cloud) {
    const Eigen::Index n = cloud.rows();
    const Eigen::Index d = cloud.dim();
    if (n < 2)
        fail(ErrorKind::Degenerate, "covariance spectrum needs at least 2 points");

    Eigen::MatrixXd centered = cloud.data.rowwise() - cloud.data.colwise().mean();
    Eigen::VectorXd eig;
    if (d <= n) {
        const Eigen::MatrixXd cov =
            centered.transpose() * centered / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        eig = solver.eigenvalues();
    } else {
        // Gram route: the nonzero spectrum of X'X/(n-1) equals that of XX'/(n-1).
        const Eigen::MatrixXd gram =
            centered * centered.transpose() / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        eig = Eigen::VectorXd::Zero(d);
        eig.head(n) = solver.eigenvalues();
    }

    SpectrumSummary summary;
    summary.eigenvalues = eig;
    std::sort(summary.eigenvalues.data(),
              summary.eigenvalues.data() + summary.eigenvalues.size(),
              std::greater<double>());
    for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i)
        if (summary.eigenvalues(i) < 0.0) summary.eigenvalues(i) = 0.0;
    return summary;
}

double twonn_dimension(const PointCloud& cloud, Metric metric) {
    const Eigen::Index n = cloud.rows();
    if (n < 3) fail(ErrorKind::Degenerate, "twonn needs at least 3 points");

    // Drop exact duplicates (distance zero to an earlier row).
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        bool duplicate = false;
        for (Eigen::Index j : keep) {
            if (point_distance(cloud.data.row(i), cloud.data.row(j), metric) == 0.0) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) keep.push_back(i);
    }
    const std::size_t m = keep.size();
    if (m < 3)
        fail(ErrorKind::Degenerate,
             "twonn needs at least 3 distinct points, got " + std::to_string(m));

    std::vector<double> mu(m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
        double d1 = std::numeric_limits<double>::infinity();
        double d2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double dist = point_distance(cloud.data.row(keep[i]),
                                               cloud.data.row(keep[j]), metric);
            if (dist < d1) {
                d2 = d1;
                d1 = dist;
            } else if (dist < d2) {
                d2 = dist;
            }
        }
        mu[i] = d2 / d1;
    }
    std::sort(mu.begin(), mu.end());

    // Empirical CDF F(mu_(k)) = k/m; the top point has 1-F = 0 and is dropped.
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        const double x = std::log(mu[k - 1]);
        const double y = -std::log(1.0 - static_cast<double>(k) /
                                             static_cast<double>(m));
        sxy += x * y;
        sxx += x * x;
    }
    if (sxx == 0.0)
        fail(ErrorKind::Degenerate, "twonn: all neighbor ratios equal 1");
    return sxy / sxx;
}

int pca_fo_dimension(const SpectrumSummary& spectrum, double alpha_fo) {
    if (alpha_fo <= 0.0 || alpha_fo >= 1.0)
        fail(ErrorKind::Bounds, "alpha_fo must lie in (0, 1)");
    const double lambda_max = spectrum.eigenvalues.size() > 0
                                  ? spectrum.eigenvalues(0)
                                  : 0.0;
    if (lambda_max <= 0.0)
        fail(ErrorKind::Degenerate, "all-zero covariance spectrum");
    int count = 0;
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
        if (spectrum.eigenvalues(i) >= alpha_fo * lambda_max) ++count;
    return count;
}

double effective_rank(const SpectrumSummary& spectrum) {
    const double total = spectrum.eigenvalues.sum();
    if (total <= 0.0)
        fail(ErrorKind::Degenerate, "zero total variance");
    double h = 0.0;
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const double p = spectrum.eigenvalues(i) / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::exp(h);
}

double isoscore(const PointCloud& cloud) {
    const double d = static_cast<double>(cloud.dim());
    if (cloud.rows() < 2)
        fail(ErrorKind::Degenerate, "isoscore needs at least 2 points");
    if (cloud.dim() == 1) return 1.0; // a single axis is trivially isotropic

    // In the principal-axis basis the covariance diagonal is the spectrum.
    const SpectrumSummary spectrum = covariance_spectrum(cloud);
    const double norm = spectrum.eigenvalues.norm();
    if (norm == 0.0) fail(ErrorKind::Degenerate, "zero covariance");

    const Eigen::VectorXd sigma_hat = std::sqrt(d) * spectrum.eigenvalues / norm;
    const double defect =
        (sigma_hat.array() - 1.0).matrix().norm() / std::sqrt(2.0 * (d - std::sqrt(d)));
    const double phi =
        std::pow(d - defect * defect * (d - std::sqrt(d)), 2.0) / (d * d);
    const double score = (d * phi - 1.0) / (d - 1.0);
    return std::clamp(score, 0.0, 1.0);
}

} // namespace uts
