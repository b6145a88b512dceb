#include "uts/diversity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "uts/error.hpp"

namespace uts {

namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr double kConvergenceFraction = 0.95;

void reject_duplicates(const DistanceMatrix& dm) {
    const Eigen::Index n = dm.size();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (dm.d(i, j) == 0.0)
                fail(ErrorKind::Conditioning,
                     "duplicate points " + std::to_string(i) + " and " +
                         std::to_string(j) + " make the similarity matrix singular");
}

// Solves exp(-t d) w = 1 and returns sum(w). Cholesky first (the kernel is
// positive definite for Euclidean inputs), LU as fallback.
double magnitude_checked(const DistanceMatrix& dm, double t) {
    const Eigen::Index n = dm.size();
    const Eigen::MatrixXd zeta = (-t * dm.d.array()).exp().matrix();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    Eigen::VectorXd w;
    const Eigen::LLT<Eigen::MatrixXd> llt(zeta);
    const bool chol_ok = llt.info() == Eigen::Success;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu =
        chol_ok ? Eigen::PartialPivLU<Eigen::MatrixXd>()
                : Eigen::PartialPivLU<Eigen::MatrixXd>(zeta);
    auto solve = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
        return chol_ok ? Eigen::VectorXd(llt.solve(rhs))
                       : Eigen::VectorXd(lu.solve(rhs));
    };
    w = solve(ones);

    // Iterative refinement recovers accuracy on tightly clustered inputs where
    // the kernel matrix has near-duplicate rows.
    double residual = (zeta * w - ones).cwiseAbs().maxCoeff();
    for (int step = 0; step < 10 && std::isfinite(residual) &&
                       residual > kResidualTolerance;
         ++step) {
        w += solve(ones - zeta * w);
        residual = (zeta * w - ones).cwiseAbs().maxCoeff();
    }
    if (!std::isfinite(residual) || residual > kResidualTolerance)
        fail(ErrorKind::Conditioning,
             "magnitude solve residual " + std::to_string(residual) +
                 " exceeds tolerance at t=" + std::to_string(t));
    return w.sum();
}

} // namespace

double magnitude(const DistanceMatrix& dm, double t) {
    if (t <= 0.0) fail(ErrorKind::Bounds, "magnitude scale t must be positive");
    if (dm.size() < 1) fail(ErrorKind::Degenerate, "empty metric space");
    reject_duplicates(dm);
    return magnitude_checked(dm, t);
}

MagnitudeCurve magnitude_function(const DistanceMatrix& dm, std::size_t grid_size) {
    if (grid_size < 2) fail(ErrorKind::Bounds, "grid needs at least 2 points");
    const Eigen::Index n = dm.size();
    if (n < 1) fail(ErrorKind::Degenerate, "empty metric space");
    reject_duplicates(dm);

    const double target = kConvergenceFraction * static_cast<double>(n);

    // t_cut by doubling then bisection: smallest t with Mag(tX) >= 0.95 n.
    double hi = 1.0;
    int guard = 0;
    while (magnitude_checked(dm, hi) < target) {
        hi *= 2.0;
        if (++guard > 60)
            fail(ErrorKind::Conditioning, "magnitude does not converge to 0.95 n");
    }
    double lo = hi / 2.0;
    guard = 0;
    while (lo > 1e-9 && magnitude_checked(dm, lo) >= target) {
        hi = lo;
        lo /= 2.0;
        if (++guard > 60) break;
    }
    for (int iter = 0; iter < 40 && (hi - lo) / hi > 1e-6; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (magnitude_checked(dm, mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    const double t_cut = hi;

    MagnitudeCurve curve;
    curve.t_cut = t_cut;
    curve.t_grid.resize(grid_size);
    curve.values.resize(grid_size);
    const double log_lo = std::log(t_cut / 1000.0);
    const double log_hi = std::log(t_cut);
    for (std::size_t i = 0; i < grid_size; ++i)
        curve.t_grid[i] = std::exp(log_lo + (log_hi - log_lo) *
                                                static_cast<double>(i) /
                                                static_cast<double>(grid_size - 1));

    // Grid points are independent solves; assembly stays in grid order.
    // Exceptions must not escape the parallel region, so failures are
    // collected and rethrown afterwards.
    std::optional<Error> solve_error;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < grid_size; ++i) {
        try {
            curve.values[i] = magnitude_checked(dm, curve.t_grid[i]);
        } catch (const Error& e) {
#pragma omp critical
            if (!solve_error) solve_error = e;
        }
    }
    if (solve_error) throw *solve_error;
    return curve;
}

double magnitude_dimension(const MagnitudeCurve& curve) {
    if (curve.t_grid.size() < 8)
        fail(ErrorKind::Estimation, "magnitude dimension needs >= 8 grid points");

    std::vector<double> xs(curve.t_grid.size()), ys(curve.t_grid.size());
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
        xs[i] = std::log(curve.t_grid[i]);
        ys[i] = std::log(curve.values[i]);
    }

    // The log-log curve is flat at both ends (near-unit magnitude at small t,
    // saturation at n for large t); the growth rate shows as the steepest
    // stretch in between. A short sliding least-squares window smooths
    // grid-level noise while tracking that scaling regime.
    constexpr std::size_t kWindow = 5;
    double best = 0.0;
    for (std::size_t start = 0; start + kWindow <= xs.size(); ++start) {
        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = start; i < start + kWindow; ++i) {
            mean_x += xs[i];
            mean_y += ys[i];
        }
        mean_x /= kWindow;
        mean_y /= kWindow;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = start; i < start + kWindow; ++i) {
            sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
            sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        }
        if (sxx > 0.0) best = std::max(best, sxy / sxx);
    }
    return best;
}

double magnitude_area(const MagnitudeCurve& curve) {
    if (curve.t_grid.size() < 2) return 0.0;
    double area = 0.0;
    for (std::size_t i = 1; i < curve.t_grid.size(); ++i)
        area += 0.5 * (curve.values[i] + curve.values[i - 1]) *
                (curve.t_grid[i] - curve.t_grid[i - 1]);
    return area;
}

double spread(const DistanceMatrix& dm) {
    const Eigen::Index n = dm.size();
    if (n < 1) fail(ErrorKind::Degenerate, "empty metric space");
    std::vector<double> inv_denominator(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) denom += std::exp(-dm.d(i, j));
        inv_denominator[static_cast<std::size_t>(i)] = 1.0 / denom;
    }
    double total = 0.0;
    for (double v : inv_denominator) total += v;
    return total;
}

namespace {

void require_unit_rows(const PointCloud& cloud, const char* who) {
    for (Eigen::Index i = 0; i < cloud.rows(); ++i)
        if (std::abs(cloud.data.row(i).norm() - 1.0) > 1e-6)
            fail(ErrorKind::Degenerate,
                 std::string(who) + " requires unit-normalized rows (row " +
                     std::to_string(i) + " is not)");
}

} // namespace

double vendi_score(const PointCloud& cloud) {
    require_unit_rows(cloud, "vendi_score");
    const Eigen::Index n = cloud.rows();
    const Eigen::Index d = cloud.dim();

    // K/n = X X' / n shares its nonzero spectrum with X'X / n; use the
    // smaller side. The missing eigenvalues are zero and contribute nothing.
    Eigen::MatrixXd small_gram;
    if (d < n)
        small_gram = cloud.data.transpose() * cloud.data / static_cast<double>(n);
    else
        small_gram = cloud.data * cloud.data.transpose() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(small_gram,
                                                          Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double lambda = solver.eigenvalues()(i);
        if (lambda > 0.0) h -= lambda * std::log(lambda);
    }
    return std::exp(h);
}

namespace {

double kernel_mean(const PointCloud& cloud, SimilarityKernel kernel, double t,
                   bool squared_exponent, bool log_output, bool parallel) {
    const Eigen::Index n = cloud.rows();
    if (n < 1) fail(ErrorKind::Degenerate, "empty cloud");

    // Per-row partials, then a fixed-order serial accumulation: the result is
    // bit-identical for any worker count.
    std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static) if (parallel)
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            double value;
            if (kernel == SimilarityKernel::Cosine) {
                value = cloud.data.row(i).dot(cloud.data.row(j));
            } else {
                const double dist = (cloud.data.row(i) - cloud.data.row(j)).norm();
                value = std::exp(-t * (squared_exponent ? dist * dist : dist));
            }
            acc += value;
        }
        row_sum[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0.0;
    for (double v : row_sum) total += v;
    const double mean = total / (static_cast<double>(n) * static_cast<double>(n));
    return log_output ? std::log(mean) : mean;
}

} // namespace

double mean_pairwise_similarity(const PointCloud& cloud, SimilarityKernel kernel) {
    if (kernel == SimilarityKernel::Cosine)
        require_unit_rows(cloud, "mean_pairwise_similarity(cosine)");
    return kernel_mean(cloud, kernel, 1.0, false, false, true);
}

double detail::mean_pairwise_similarity_serial(const PointCloud& cloud,
                                               SimilarityKernel kernel) {
    if (kernel == SimilarityKernel::Cosine)
        require_unit_rows(cloud, "mean_pairwise_similarity(cosine)");
    return kernel_mean(cloud, kernel, 1.0, false, false, false);
}

double uniformity(const PointCloud& cloud, double t) {
    if (t <= 0.0) fail(ErrorKind::Bounds, "uniformity temperature must be positive");
    require_unit_rows(cloud, "uniformity");
    return kernel_mean(cloud, SimilarityKernel::ExpEuclidean, t, true, true, true);
}

double detail::uniformity_serial(const PointCloud& cloud, double t) {
    if (t <= 0.0) fail(ErrorKind::Bounds, "uniformity temperature must be positive");
    require_unit_rows(cloud, "uniformity");
    return kernel_mean(cloud, SimilarityKernel::ExpEuclidean, t, true, true, false);
}

} // namespace uts
