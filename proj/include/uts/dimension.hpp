#pragma once

#include <Eigen/Core>
#include <vector>

#include "uts/point_cloud.hpp"

namespace uts {

/// Eigenvalues of the mean-centered sample covariance, descending,
/// negatives clamped to zero.
struct SpectrumSummary {
    Eigen::VectorXd eigenvalues;
};

SpectrumSummary covariance_spectrum(const PointCloud& cloud);

// TwoNN intrinsic dimension: origin-constrained fit of -log(1 - F(mu))
// against log mu, where mu is the ratio of second to first neighbor
// distances. Duplicate points are dropped before the ratio computation.
double twonn_dimension(const PointCloud& cloud, Metric metric);

// Fukunaga-Olsen rule: count of eigenvalues >= alpha_fo * lambda_max.
int pca_fo_dimension(const SpectrumSummary& spectrum, double alpha_fo = 0.5);

// exp of the Shannon entropy of the normalized spectrum.
double effective_rank(const SpectrumSummary& spectrum);

// Isotropy score in [0,1]: PCA reorientation, diagonal normalization,
// isotropy defect, and rescaling.
double isoscore(const PointCloud& cloud);

} // namespace uts
