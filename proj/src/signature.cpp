#include "uts/signature.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uts/clustering.hpp"
#include "uts/dimension.hpp"
#include "uts/diversity.hpp"
#include "uts/error.hpp"
#include "uts/homology.hpp"
#include "uts/rng.hpp"

namespace uts {

DescriptorConfig DescriptorConfig::full_scale() {
    DescriptorConfig c;
    c.ph_dim_budget = 5000;
    c.ph_stats_budget = 5000;
    c.ph_entropy_budget = 20000;
    c.euler_budget = 5000;
    c.twonn_budget = 50000;
    c.pca_dim_budget = 50000;
    c.effective_rank_budget = 100000;
    c.magnitude_budget = 5000;
    c.spread_budget = 10000;
    c.vendi_budget = 20000;
    c.pairwise_budget = 50000;
    c.uniformity_budget = 20000;
    c.isoscore_budget = 500000;
    c.silhouette_budget = 20000;
    return c;
}

namespace {

const std::vector<Metric> kMetricVariants = {Metric::Euclidean,
                                             Metric::CosineDistance};

std::string suffixed(const std::string& base, Metric m) {
    return base + ":" + metric_name(m);
}

} // namespace

std::vector<std::string> DescriptorConfig::component_names() const {
    std::vector<std::string> names;
    for (Metric m : kMetricVariants) {
        names.push_back(suffixed("ph_dim", m));
        names.push_back(suffixed("ph_mean_lifetime_h0", m));
        names.push_back(suffixed("ph_mean_midlife_h0", m));
        if (homology_max_dim >= 1) {
            names.push_back(suffixed("ph_mean_lifetime_h1", m));
            names.push_back(suffixed("ph_mean_midlife_h1", m));
        }
        names.push_back(suffixed("persistence_entropy_h0", m));
        if (homology_max_dim >= 1)
            names.push_back(suffixed("persistence_entropy_h1", m));
        names.push_back(suffixed("euler_characteristic", m));
        names.push_back(suffixed("twonn", m));
        names.push_back(suffixed("magnitude_dim", m));
        names.push_back(suffixed("magnitude_area", m));
        names.push_back(suffixed("spread", m));
        names.push_back(suffixed("silhouette_score", m));
        names.push_back(suffixed("silhouette_k", m));
    }
    names.push_back("pca_fo_dim");
    names.push_back("effective_rank");
    names.push_back("isoscore");
    names.push_back("vendi");
    names.push_back("mean_pairwise_similarity:cosine");
    names.push_back("mean_pairwise_similarity:exp_euclidean");
    names.push_back("uniformity");
    return names;
}

std::string DescriptorConfig::hash() const {
    std::ostringstream payload;
    payload << ph_dim_budget << '|' << ph_stats_budget << '|' << ph_entropy_budget
            << '|' << euler_budget << '|' << twonn_budget << '|' << pca_dim_budget
            << '|' << effective_rank_budget << '|' << magnitude_budget << '|'
            << spread_budget << '|' << vendi_budget << '|' << pairwise_budget
            << '|' << uniformity_budget << '|' << isoscore_budget << '|'
            << silhouette_budget << '|' << h1_point_cap << '|' << homology_max_dim
            << '|' << magnitude_grid << '|' << ph_dim_trials << '|' << uniformity_t
            << '|' << fo_alpha;
    for (auto k : silhouette_k_set) payload << ',' << k;
    std::ostringstream out;
    out << std::hex << hash64(payload.str());
    return out.str();
}

double SignatureVector::at(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    fail(ErrorKind::Schema, "no component named '" + name + "'");
}

bool SignatureVector::same_schema(const SignatureVector& other) const {
    return names == other.names;
}

namespace {

// Geometric ladder of subset sizes for the persistence-sum regression.
std::vector<std::size_t> ph_dim_sizes(std::size_t n_available) {
    const std::size_t hi = n_available;
    std::size_t lo = std::min<std::size_t>(64, std::max<std::size_t>(8, hi / 8));
    if (lo >= hi) lo = std::max<std::size_t>(4, hi / 4);
    std::vector<std::size_t> sizes;
    constexpr int kSteps = 8;
    for (int j = 0; j < kSteps; ++j) {
        const double f = static_cast<double>(j) / (kSteps - 1);
        const auto s = static_cast<std::size_t>(std::llround(
            std::exp(std::log(static_cast<double>(lo)) +
                     f * (std::log(static_cast<double>(hi)) -
                          std::log(static_cast<double>(lo))))));
        if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
    }
    if (sizes.size() < 4)
        fail(ErrorKind::Degenerate,
             "cloud too small for the persistence-dimension ladder (n=" +
                 std::to_string(n_available) + ")");
    return sizes;
}

double median_offdiagonal(const DistanceMatrix& dm) {
    std::vector<double> values;
    const Eigen::Index n = dm.size();
    values.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) values.push_back(dm.d(i, j));
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    return m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

// Shared machinery for global signatures (budgeted, independently seeded
// samples) and local signatures (one fixed neighborhood, no subsampling).
class SignatureBuilder {
  public:
    SignatureBuilder(const PointCloud& cloud, const DescriptorConfig& config,
                     std::uint64_t seed, bool subsample)
        : cloud_(cloud), config_(config), seed_(seed), subsample_(subsample) {}

    SignatureVector build() {
        SignatureVector sig;
        sig.seed = seed_;
        sig.config_hash = config_.hash();
        sig.names = config_.component_names();
        sig.values.resize(sig.names.size());

        for (Metric m : kMetricVariants) compute_metric_block(sig, m);
        compute_spectral_block(sig);

        for (double v : sig.values)
            if (!std::isfinite(v))
                fail(ErrorKind::Degenerate, "non-finite signature component");
        sig.realized_sizes = realized_;
        return sig;
    }

  private:
    PointCloud draw(std::size_t budget, const std::string& stream) {
        const auto n = static_cast<std::size_t>(cloud_.rows());
        if (!subsample_) {
            realized_[stream] = n;
            return cloud_;
        }
        const std::size_t size = std::min(budget, n);
        realized_[stream] = size;
        if (size == n) return cloud_;
        return sample(cloud_, SampleSpec{size, derive_seed(seed_, stream)});
    }

    void set(SignatureVector& sig, const std::string& name, double value) {
        for (std::size_t i = 0; i < sig.names.size(); ++i)
            if (sig.names[i] == name) {
                sig.values[i] = value;
                return;
            }
        fail(ErrorKind::Schema, "unknown component '" + name + "'");
    }

    void compute_metric_block(SignatureVector& sig, Metric m) {
        const std::string sfx = ":" + metric_name(m);
        const std::size_t h1_cap = config_.h1_point_cap;

        // Persistence dimension (H0 only, alpha = 1).
        {
            const PointCloud s = draw(config_.ph_dim_budget, "ph_dim" + sfx);
            const auto sizes = ph_dim_sizes(static_cast<std::size_t>(s.rows()));
            set(sig, "ph_dim" + sfx,
                ph_dimension(s, m, 1.0, sizes, config_.ph_dim_trials,
                             derive_seed(seed_, "ph_dim_trials" + sfx)));
        }

        // PH statistics (separate diagram per descriptor budget).
        {
            const PointCloud s =
                draw(std::min(config_.ph_stats_budget, h1_cap), "ph_stats" + sfx);
            const auto diag = rips_for(s, m);
            const PhStats h0 = ph_stats(diag, 0);
            set(sig, "ph_mean_lifetime_h0" + sfx, h0.mean_lifetime);
            set(sig, "ph_mean_midlife_h0" + sfx, h0.mean_midlife);
            if (config_.homology_max_dim >= 1) {
                const PhStats h1 = ph_stats(diag, 1);
                set(sig, "ph_mean_lifetime_h1" + sfx, h1.mean_lifetime);
                set(sig, "ph_mean_midlife_h1" + sfx, h1.mean_midlife);
            }
        }

        {
            const PointCloud s = draw(std::min(config_.ph_entropy_budget, h1_cap),
                                      "persistence_entropy" + sfx);
            const auto diag = rips_for(s, m);
            set(sig, "persistence_entropy_h0" + sfx, persistence_entropy(diag, 0));
            if (config_.homology_max_dim >= 1)
                set(sig, "persistence_entropy_h1" + sfx,
                    persistence_entropy(diag, 1));
        }

        {
            const PointCloud s =
                draw(std::min(config_.euler_budget, h1_cap), "euler" + sfx);
            const DistanceMatrix dm = pairwise_distances(s, m);
            const auto diag = rips_persistence(dm, config_.homology_max_dim);
            const double tau = median_offdiagonal(dm);
            set(sig, "euler_characteristic" + sfx,
                static_cast<double>(euler_characteristic(diag, tau)));
        }

        {
            const PointCloud s = draw(config_.twonn_budget, "twonn" + sfx);
            set(sig, "twonn" + sfx, twonn_dimension(s, m));
        }

        {
            const PointCloud s = draw(config_.magnitude_budget, "magnitude" + sfx);
            const DistanceMatrix dm = pairwise_distances(s, m);
            const MagnitudeCurve curve =
                magnitude_function(dm, config_.magnitude_grid);
            set(sig, "magnitude_dim" + sfx, magnitude_dimension(curve));
            set(sig, "magnitude_area" + sfx, magnitude_area(curve));
        }

        {
            const PointCloud s = draw(config_.spread_budget, "spread" + sfx);
            set(sig, "spread" + sfx, spread(pairwise_distances(s, m)));
        }

        {
            const PointCloud s =
                draw(config_.silhouette_budget, "silhouette" + sfx);
            const SilhouettePick pick = best_silhouette(
                s, config_.silhouette_k_set,
                derive_seed(seed_, "silhouette" + sfx), m);
            set(sig, "silhouette_score" + sfx, pick.score);
            set(sig, "silhouette_k" + sfx, static_cast<double>(pick.k_star));
        }
    }

    void compute_spectral_block(SignatureVector& sig) {
        {
            const PointCloud s = draw(config_.pca_dim_budget, "pca_fo_dim");
            set(sig, "pca_fo_dim",
                static_cast<double>(
                    pca_fo_dimension(covariance_spectrum(s), config_.fo_alpha)));
        }
        {
            const PointCloud s =
                draw(config_.effective_rank_budget, "effective_rank");
            set(sig, "effective_rank", effective_rank(covariance_spectrum(s)));
        }
        {
            const PointCloud s = draw(config_.isoscore_budget, "isoscore");
            set(sig, "isoscore", isoscore(s));
        }
        {
            const PointCloud s = draw(config_.vendi_budget, "vendi");
            set(sig, "vendi", vendi_score(s));
        }
        {
            const PointCloud s =
                draw(config_.pairwise_budget, "mean_pairwise_similarity");
            set(sig, "mean_pairwise_similarity:cosine",
                mean_pairwise_similarity(s, SimilarityKernel::Cosine));
            set(sig, "mean_pairwise_similarity:exp_euclidean",
                mean_pairwise_similarity(s, SimilarityKernel::ExpEuclidean));
        }
        {
            const PointCloud s = draw(config_.uniformity_budget, "uniformity");
            set(sig, "uniformity", uniformity(s, config_.uniformity_t));
        }
    }

    PersistenceDiagram rips_for(const PointCloud& s, Metric m) const {
        return rips_persistence(pairwise_distances(s, m), config_.homology_max_dim);
    }

    const PointCloud& cloud_;
    const DescriptorConfig& config_;
    std::uint64_t seed_;
    bool subsample_;
    std::map<std::string, std::size_t> realized_;
};

void require_unit_rows_soft(const PointCloud& cloud) {
    for (Eigen::Index i = 0; i < cloud.rows(); ++i)
        if (std::abs(cloud.data.row(i).norm() - 1.0) > 1e-6)
            fail(ErrorKind::Degenerate,
                 "signatures require unit-normalized rows (row " +
                     std::to_string(i) + " is not); run normalize_rows first");
}

} // namespace

SignatureVector compute_global_signature(const PointCloud& cloud,
                                         const DescriptorConfig& config,
                                         std::uint64_t seed) {
    if (cloud.rows() < 1) fail(ErrorKind::Degenerate, "empty cloud");
    require_unit_rows_soft(cloud);
    SignatureBuilder builder(cloud, config, seed, /*subsample=*/true);
    SignatureVector sig = builder.build();
    if (cloud.id) sig.source.dataset = *cloud.id;
    return sig;
}

SignatureVector compute_local_signature(const PointCloud& cloud,
                                        std::size_t anchor, std::size_t k,
                                        const DescriptorConfig& config) {
    const auto n = static_cast<std::size_t>(cloud.rows());
    if (k >= n)
        fail(ErrorKind::Bounds, "local signature requires k <= n-1, got k=" +
                                    std::to_string(k) + " with n=" + std::to_string(n));
    require_unit_rows_soft(cloud);

    const auto neighbors = knn(cloud, anchor, k, Metric::CosineDistance);
    PointCloud neighborhood;
    neighborhood.id = cloud.id;
    neighborhood.data.resize(static_cast<Eigen::Index>(k), cloud.dim());
    for (std::size_t i = 0; i < k; ++i)
        neighborhood.data.row(static_cast<Eigen::Index>(i)) =
            cloud.data.row(static_cast<Eigen::Index>(neighbors[i]));

    SignatureBuilder builder(neighborhood, config, /*seed=*/0,
                             /*subsample=*/false);
    SignatureVector sig = builder.build();
    if (cloud.id) sig.source.dataset = *cloud.id;
    return sig;
}

NormalizationState fit_normalization(const std::vector<SignatureVector>& set) {
    if (set.empty()) fail(ErrorKind::Degenerate, "empty signature set");
    for (const auto& v : set)
        if (!v.same_schema(set.front()))
            fail(ErrorKind::Schema, "signatures in the set have mixed schemas");

    NormalizationState state;
    state.names = set.front().names;
    state.max_abs.assign(state.names.size(), 0.0);
    for (const auto& v : set)
        for (std::size_t i = 0; i < v.values.size(); ++i)
            state.max_abs[i] = std::max(state.max_abs[i], std::abs(v.values[i]));
    state.constant.resize(state.names.size());
    for (std::size_t i = 0; i < state.max_abs.size(); ++i)
        state.constant[i] = state.max_abs[i] == 0.0;
    return state;
}

SignatureVector apply_normalization(const SignatureVector& v,
                                    const NormalizationState& state) {
    if (v.names != state.names)
        fail(ErrorKind::Schema, "signature schema does not match normalization state");
    SignatureVector out;
    out.source = v.source;
    out.seed = v.seed;
    out.config_hash = v.config_hash;
    out.realized_sizes = v.realized_sizes;
    for (std::size_t i = 0; i < v.names.size(); ++i) {
        if (state.constant[i]) continue; // flagged constant: dropped
        out.names.push_back(v.names[i]);
        out.values.push_back(v.values[i] / state.max_abs[i]);
    }
    return out;
}

ReducedSignatureSet pca_reduce(const std::vector<SignatureVector>& set,
                               double variance_target,
                               std::optional<std::size_t> explicit_l) {
    if (set.size() < 2)
        fail(ErrorKind::Degenerate, "pca_reduce needs at least 2 signatures");
    for (const auto& v : set)
        if (!v.same_schema(set.front()))
            fail(ErrorKind::Schema, "signatures in the set have mixed schemas");

    const auto m = static_cast<Eigen::Index>(set.size());
    const auto k = static_cast<Eigen::Index>(set.front().names.size());
    Eigen::MatrixXd matrix(m, k);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            matrix(i, j) = set[static_cast<std::size_t>(i)]
                               .values[static_cast<std::size_t>(j)];

    ReducedSignatureSet result;
    result.component_names = set.front().names;
    result.mean = matrix.colwise().mean();
    const Eigen::MatrixXd centered = matrix.rowwise() - result.mean.transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd variances = sv.array().square() / static_cast<double>(m - 1);
    const double total = variances.sum();
    if (total <= 0.0)
        fail(ErrorKind::Degenerate, "signature set has zero variance");

    Eigen::Index rank = 0;
    const double tol = sv(0) * 1e-12;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;

    Eigen::Index l;
    if (explicit_l) {
        l = std::min<Eigen::Index>(static_cast<Eigen::Index>(*explicit_l), rank);
    } else {
        l = rank;
        double cumulative = 0.0;
        for (Eigen::Index i = 0; i < rank; ++i) {
            cumulative += variances(i) / total;
            if (cumulative >= variance_target) {
                l = i + 1;
                break;
            }
        }
    }

    result.loadings = svd.matrixV().leftCols(l).transpose(); // L x K
    result.coordinates = centered * svd.matrixV().leftCols(l);
    result.explained_variance_ratio = variances.head(l) / total;
    return result;
}

std::vector<double> componentwise_distance(const SignatureVector& a,
                                           const SignatureVector& b) {
    if (!a.same_schema(b))
        fail(ErrorKind::Schema, "componentwise distance needs matching schemas");
    std::vector<double> delta(a.values.size());
    for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] = std::abs(a.values[i] - b.values[i]);
    return delta;
}

double signature_distance(const SignatureVector& a, const SignatureVector& b) {
    const auto delta = componentwise_distance(a, b);
    return std::accumulate(delta.begin(), delta.end(), 0.0);
}

double cka(const PointCloud& x, const PointCloud& y) {
    if (x.rows() != y.rows())
        fail(ErrorKind::Schema, "cka needs paired rows: " +
                                    std::to_string(x.rows()) + " vs " +
                                    std::to_string(y.rows()));
    if (x.rows() < 2) fail(ErrorKind::Degenerate, "cka needs at least 2 rows");

    const Eigen::MatrixXd xc = x.data.rowwise() - x.data.colwise().mean();
    const Eigen::MatrixXd yc = y.data.rowwise() - y.data.colwise().mean();
    const double cross = (yc.transpose() * xc).squaredNorm();
    const double self_x = (xc.transpose() * xc).norm();
    const double self_y = (yc.transpose() * yc).norm();
    if (self_x == 0.0 || self_y == 0.0)
        fail(ErrorKind::Degenerate, "cka undefined for constant representations");
    return cross / (self_x * self_y);
}

CorrelationReport correlation_report(
    const std::vector<SignatureVector>& set,
    const std::map<std::string, std::map<std::string, double>>& extras) {
    if (set.empty()) fail(ErrorKind::Degenerate, "empty signature set");
    for (const auto& v : set)
        if (!v.same_schema(set.front()))
            fail(ErrorKind::Schema, "signatures in the set have mixed schemas");

    std::vector<std::string> variables = set.front().names;
    for (const auto& [name, _] : extras) variables.push_back(name);
    const auto k = static_cast<Eigen::Index>(variables.size());

    std::map<std::string, std::vector<const SignatureVector*>> groups;
    for (const auto& v : set) groups[v.source.dataset].push_back(&v);
    for (const auto& [dataset, members] : groups)
        if (members.size() < 3)
            fail(ErrorKind::Degenerate, "group '" + dataset +
                                            "' holds fewer than 3 signatures");

    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd defined = Eigen::MatrixXd::Zero(k, k);

    for (const auto& [dataset, members] : groups) {
        const auto rows = static_cast<Eigen::Index>(members.size());
        Eigen::MatrixXd table(rows, k);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const SignatureVector& v = *members[static_cast<std::size_t>(r)];
            for (std::size_t c = 0; c < v.values.size(); ++c)
                table(r, static_cast<Eigen::Index>(c)) = v.values[c];
            Eigen::Index c = static_cast<Eigen::Index>(v.values.size());
            for (const auto& [name, by_model] : extras) {
                const auto it = by_model.find(v.source.model);
                if (it == by_model.end())
                    fail(ErrorKind::Schema, "extra '" + name +
                                                "' missing for model '" +
                                                v.source.model + "'");
                table(r, c++) = it->second;
            }
        }

        const Eigen::RowVectorXd mean = table.colwise().mean();
        const Eigen::MatrixXd centered = table.rowwise() - mean;
        const Eigen::VectorXd sd =
            (centered.array().square().colwise().sum() /
             static_cast<double>(rows))
                .sqrt();
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) {
                if (sd(a) == 0.0 || sd(b) == 0.0) continue; // undefined: missing
                const double corr = centered.col(a).dot(centered.col(b)) /
                                    (static_cast<double>(rows) * sd(a) * sd(b));
                sum(a, b) += corr;
                sum_sq(a, b) += corr * corr;
                defined(a, b) += 1.0;
            }
    }

    const double group_count = static_cast<double>(groups.size());
    CorrelationReport report;
    Eigen::MatrixXd mean(k, k), variance(k, k), missing(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            if (defined(a, b) > 0.0) {
                mean(a, b) = sum(a, b) / defined(a, b);
                variance(a, b) =
                    sum_sq(a, b) / defined(a, b) - mean(a, b) * mean(a, b);
            } else {
                mean(a, b) = std::numeric_limits<double>::quiet_NaN();
                variance(a, b) = std::numeric_limits<double>::quiet_NaN();
            }
            missing(a, b) = 1.0 - defined(a, b) / group_count;
        }

    // Order variables by average-linkage clustering of 1 - |mean corr|.
    Eigen::MatrixXd dist(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            dist(a, b) = a == b ? 0.0
                                : (std::isnan(mean(a, b))
                                       ? 1.0
                                       : 1.0 - std::abs(0.5 * (mean(a, b) +
                                                               mean(b, a))));
    const Dendrogram tree = average_linkage(dist);

    // Leaf order by recursive traversal of the merge tree.
    std::vector<Eigen::Index> order;
    if (k == 1) {
        order.push_back(0);
    } else {
        std::vector<std::vector<int>> children(2 * static_cast<std::size_t>(k) - 1);
        for (const auto& merge : tree.merges)
            children[static_cast<std::size_t>(merge.id)] = {merge.left, merge.right};
        std::vector<int> stack = {tree.merges.back().id};
        while (!stack.empty()) {
            const int node = stack.back();
            stack.pop_back();
            if (children[static_cast<std::size_t>(node)].empty()) {
                order.push_back(node);
            } else {
                stack.push_back(children[static_cast<std::size_t>(node)][1]);
                stack.push_back(children[static_cast<std::size_t>(node)][0]);
            }
        }
    }

    report.names.resize(static_cast<std::size_t>(k));
    report.mean.resize(k, k);
    report.variance.resize(k, k);
    report.missing_fraction.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        report.names[static_cast<std::size_t>(a)] =
            variables[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])];
        for (Eigen::Index b = 0; b < k; ++b) {
            report.mean(a, b) = mean(order[static_cast<std::size_t>(a)],
                                     order[static_cast<std::size_t>(b)]);
            report.variance(a, b) = variance(order[static_cast<std::size_t>(a)],
                                             order[static_cast<std::size_t>(b)]);
            report.missing_fraction(a, b) =
                missing(order[static_cast<std::size_t>(a)],
                        order[static_cast<std::size_t>(b)]);
        }
    }
    return report;
}

// --- serialization -----------------------------------------------------------

std::string signature_to_json(const SignatureVector& v) {
    nlohmann::ordered_json j;
    j["source"] = {{"model", v.source.model}, {"dataset", v.source.dataset}};
    j["seed"] = v.seed;
    j["config_hash"] = v.config_hash;
    j["realized_sizes"] = v.realized_sizes;
    nlohmann::ordered_json components;
    for (std::size_t i = 0; i < v.names.size(); ++i)
        components[v.names[i]] = v.values[i];
    j["components"] = components;
    return j.dump();
}

SignatureVector signature_from_json(const std::string& json_text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, std::string("invalid signature json: ") + e.what());
    }
    SignatureVector v;
    try {
        v.source.model = j.at("source").at("model").get<std::string>();
        v.source.dataset = j.at("source").at("dataset").get<std::string>();
        v.seed = j.at("seed").get<std::uint64_t>();
        v.config_hash = j.at("config_hash").get<std::string>();
        if (j.contains("realized_sizes"))
            for (const auto& [key, value] : j.at("realized_sizes").items())
                v.realized_sizes[key] = value.get<std::size_t>();
        for (const auto& [key, value] : j.at("components").items()) {
            v.names.push_back(key);
            v.values.push_back(value.get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Parse, std::string("signature json schema: ") + e.what());
    }
    return v;
}

void save_signatures_jsonl(const std::vector<SignatureVector>& set,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Parse, "cannot write '" + path + "'");
    for (const auto& v : set) out << signature_to_json(v) << '\n';
}

std::vector<SignatureVector> load_signatures_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
    std::vector<SignatureVector> set;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        set.push_back(signature_from_json(line));
    }
    return set;
}

} // namespace uts
