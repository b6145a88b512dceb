#pragma once

#include <vector>

#include "uts/point_cloud.hpp"

namespace uts {

/// Magnitude function samples on a log-spaced scale grid ending at the
/// convergence scale t_cut (smallest t with Mag(tX) >= 0.95 n).
struct MagnitudeCurve {
    std::vector<double> t_grid;
    std::vector<double> values;
    double t_cut = 0.0;
};

// Total weight solving exp(-t d) w = 1. Linear solve with a residual check;
// ill-conditioned similarity matrices (duplicate points) are rejected.
double magnitude(const DistanceMatrix& dm, double t);

MagnitudeCurve magnitude_function(const DistanceMatrix& dm, std::size_t grid_size);

// Least-squares slope of log Mag vs log t over the central quantile window
// of the grid.
double magnitude_dimension(const MagnitudeCurve& curve);

// Trapezoidal integral of the curve over its grid.
double magnitude_area(const MagnitudeCurve& curve);

// E_0 = sum_x 1 / sum_x' exp(-d(x, x')).
double spread(const DistanceMatrix& dm);

// exp of the eigenvalue entropy of the cosine Gram matrix over n.
double vendi_score(const PointCloud& cloud);

enum class SimilarityKernel { Cosine, ExpEuclidean };

// Mean of k(x_i, x_j) over all ordered pairs including i = j.
double mean_pairwise_similarity(const PointCloud& cloud, SimilarityKernel kernel);

// log mean of exp(-t ||x_i - x_j||^2) over all ordered pairs including i = j.
double uniformity(const PointCloud& cloud, double t = 2.0);

namespace detail {
// Serial references for the OpenMP kernel sums, kept for tests and the
// benchmark target.
double mean_pairwise_similarity_serial(const PointCloud& cloud,
                                       SimilarityKernel kernel);
double uniformity_serial(const PointCloud& cloud, double t);
} // namespace detail

} // namespace uts
