#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uts/point_cloud.hpp"

namespace uts {

/// Per-descriptor sample budgets and knobs. Desk-scale defaults are one tenth
/// of the full budgets; both clamp to the cloud size at compute time.
struct DescriptorConfig {
    std::size_t ph_dim_budget = 500;
    std::size_t ph_stats_budget = 500;
    std::size_t ph_entropy_budget = 2000;
    std::size_t euler_budget = 500;
    std::size_t twonn_budget = 5000;
    std::size_t pca_dim_budget = 5000;
    std::size_t effective_rank_budget = 10000;
    std::size_t magnitude_budget = 500;
    std::size_t spread_budget = 1000;
    std::size_t vendi_budget = 2000;
    std::size_t pairwise_budget = 5000;
    std::size_t uniformity_budget = 2000;
    std::size_t isoscore_budget = 50000;
    std::size_t silhouette_budget = 2000;

    // Boundary-matrix reduction cost grows cubically in points, so diagrams
    // for H>=1 are computed on at most this many points regardless of budget.
    std::size_t h1_point_cap = 200;

    int homology_max_dim = 1;
    std::size_t magnitude_grid = 16;
    std::size_t ph_dim_trials = 5;
    double uniformity_t = 2.0;
    double fo_alpha = 0.5;
    std::vector<std::size_t> silhouette_k_set = {3, 5, 10, 20, 50, 100};

    static DescriptorConfig desk_scale() { return DescriptorConfig{}; }
    static DescriptorConfig full_scale();

    // Fixed component order for this configuration.
    std::vector<std::string> component_names() const;

    std::string hash() const;
};

struct SignatureSource {
    std::string model;
    std::string dataset;
};

struct SignatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
    SignatureSource source;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::map<std::string, std::size_t> realized_sizes;

    double at(const std::string& name) const;
    bool same_schema(const SignatureVector& other) const;
};

SignatureVector compute_global_signature(const PointCloud& cloud,
                                         const DescriptorConfig& config,
                                         std::uint64_t seed);

// Signature of the k cosine-nearest neighborhood of one point (anchor
// excluded, no subsampling inside the neighborhood).
SignatureVector compute_local_signature(const PointCloud& cloud,
                                        std::size_t anchor, std::size_t k,
                                        const DescriptorConfig& config);

struct NormalizationState {
    std::vector<std::string> names;
    std::vector<double> max_abs;      // per component
    std::vector<bool> constant;       // flagged for exclusion downstream
};

NormalizationState fit_normalization(const std::vector<SignatureVector>& set);

// Component-wise division by the stored maxima; flagged constant components
// are dropped from the output. Values from unseen data are not clamped.
SignatureVector apply_normalization(const SignatureVector& v,
                                    const NormalizationState& state);

struct ReducedSignatureSet {
    Eigen::MatrixXd coordinates;             // m x L
    Eigen::MatrixXd loadings;                // L x K projection
    Eigen::VectorXd explained_variance_ratio; // length L, descending
    Eigen::VectorXd mean;                    // centering offset, length K
    std::vector<std::string> component_names;
};

// PCA over normalized signatures; chooses the smallest L reaching the
// variance target unless an explicit L is given.
ReducedSignatureSet pca_reduce(const std::vector<SignatureVector>& set,
                               double variance_target = 0.91,
                               std::optional<std::size_t> explicit_l = {});

std::vector<double> componentwise_distance(const SignatureVector& a,
                                           const SignatureVector& b);

// Manhattan distance between fixed-schema signatures.
double signature_distance(const SignatureVector& a, const SignatureVector& b);

// Linear centered kernel alignment between paired representations.
double cka(const PointCloud& x, const PointCloud& y);

struct CorrelationReport {
    std::vector<std::string> names;   // in dendrogram order
    Eigen::MatrixXd mean;             // mean Pearson correlation across groups
    Eigen::MatrixXd variance;         // variance across groups
    Eigen::MatrixXd missing_fraction; // fraction of groups with undefined corr
};

// Pearson correlations per dataset group (signature components plus optional
// per-source extras), aggregated across groups and ordered by average-linkage
// clustering of 1 - |mean corr|.
CorrelationReport correlation_report(
    const std::vector<SignatureVector>& set,
    const std::map<std::string, std::map<std::string, double>>& extras = {});

// --- serialization ----------------------------------------------------------

std::string signature_to_json(const SignatureVector& v);
SignatureVector signature_from_json(const std::string& json_text);
void save_signatures_jsonl(const std::vector<SignatureVector>& set,
                           const std::string& path);
std::vector<SignatureVector> load_signatures_jsonl(const std::string& path);

} // namespace uts
