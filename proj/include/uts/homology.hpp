#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "uts/point_cloud.hpp"

namespace uts {

constexpr double kInfDeath = std::numeric_limits<double>::infinity();

struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = kInfDeath;

    double lifetime() const { return death - birth; }
    bool finite() const { return death != kInfDeath; }
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;

    std::vector<PersistencePair> in_dim(int dim) const;
};

struct BettiProfile {
    double tau = 0.0;
    std::vector<std::size_t> betti; // beta_0 .. beta_max_dim
};

struct PhStats {
    double mean_lifetime = 0.0;
    double mean_midlife = 0.0;
};

// Vietoris-Rips persistence up to max_dim (0..2). H0 by union-find over
// ascending edges; H>=1 by boundary-matrix reduction with clearing.
// threshold <= 0 means "use the max pairwise distance"; for H>=1 the complex
// is truncated at the enclosing radius when that leaves diagrams unchanged.
// Zero-persistence pairs are dropped.
PersistenceDiagram rips_persistence(const DistanceMatrix& dm, int max_dim,
                                    double threshold = 0.0);

PhStats ph_stats(const PersistenceDiagram& diag, int dim);

// Shannon entropy of normalized lifetimes (natural log) over finite pairs.
double persistence_entropy(const PersistenceDiagram& diag, int dim);

// Fractal-type dimension from the growth of the alpha-weighted H0
// persistence sum across subset sizes: slope m of log E vs log n, estimate
// alpha / (1 - m). Deterministic given seed.
double ph_dimension(const PointCloud& cloud, Metric metric, double alpha,
                    const std::vector<std::size_t>& sizes, std::size_t trials,
                    std::uint64_t seed);

BettiProfile betti_numbers(const PersistenceDiagram& diag, int max_dim, double tau);

long euler_characteristic(const PersistenceDiagram& diag, double tau);

std::string diagram_to_csv(const PersistenceDiagram& diag);
PersistenceDiagram diagram_from_csv(const std::string& text);

} // namespace uts
