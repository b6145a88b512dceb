#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uts/dimension.hpp"
#include "uts/error.hpp"

using namespace uts;

namespace {
PointCloud from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    PointCloud cloud;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows.begin()->size());
    cloud.data.resize(n, d);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) cloud.data(i, j++) = v;
        ++i;
    }
    return cloud;
}

// Maximum-likelihood TwoNN: d = n / sum(log mu), on exact mu ratios.
double twonn_mle(const PointCloud& cloud) {
    const auto dm = pairwise_distances(cloud, Metric::Euclidean);
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < dm.d.rows(); ++i) {
        double d1 = 1e300, d2 = 1e300;
        for (Eigen::Index j = 0; j < dm.d.cols(); ++j) {
            if (j == i) continue;
            const double v = dm.d(i, j);
            if (v < d1) {
                d2 = d1;
                d1 = v;
            } else if (v < d2) {
                d2 = v;
            }
        }
        if (d1 <= 0.0) continue;
        sum += std::log(d2 / d1);
        ++count;
    }
    return static_cast<double>(count) / sum;
}
} // namespace

TEST_CASE("covariance_spectrum") {
    SUBCASE("x-axis pair -> (2, 0)") {
        const auto s = covariance_spectrum(from_rows({{-1.0, 0.0}, {1.0, 0.0}}));
        CHECK(s.eigenvalues(0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(s.eigenvalues(1) == doctest::Approx(0.0));
    }
    SUBCASE("isotropic cross -> equal eigenvalues") {
        const auto s = covariance_spectrum(
            from_rows({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}));
        CHECK(s.eigenvalues(0) == doctest::Approx(s.eigenvalues(1)).epsilon(1e-12));
    }
    SUBCASE("rank-1 data in 3-D -> one nonzero eigenvalue") {
        const auto s = covariance_spectrum(
            from_rows({{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {3.0, 6.0, 9.0}}));
        CHECK(s.eigenvalues(0) > 0.0);
        CHECK(s.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(s.eigenvalues(2) == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("n < 2 -> degenerate error") {
        CHECK_THROWS_AS(covariance_spectrum(from_rows({{1.0, 2.0}})), Error);
    }
    SUBCASE("gram route (D > n) matches direct covariance spectrum") {
        const PointCloud wide = oracle::gaussian_cloud(10, 40, 3);
        const auto s = covariance_spectrum(wide);
        // Direct dense covariance for comparison.
        Eigen::MatrixXd centered =
            wide.data.rowwise() - wide.data.colwise().mean();
        Eigen::MatrixXd cov =
            centered.transpose() * centered / (wide.data.rows() - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        Eigen::VectorXd want = es.eigenvalues().reverse();
        for (Eigen::Index i = 0; i < s.eigenvalues.size() && i < 9; ++i)
            CHECK(s.eigenvalues(i) == doctest::Approx(want(i)).epsilon(1e-8));
    }
}

TEST_CASE("twonn_dimension") {
    SUBCASE("uniform square ~ 2") {
        const double d = twonn_dimension(oracle::square_cloud(1000, 2, 11),
                                         Metric::Euclidean);
        CHECK(d == doctest::Approx(2.0).epsilon(0.15));
        CHECK(std::abs(d - twonn_mle(oracle::square_cloud(1000, 2, 11))) < 0.4);
    }
    SUBCASE("uniform segment ~ 1") {
        const double d = twonn_dimension(oracle::segment_cloud(1000, 2, 12),
                                         Metric::Euclidean);
        CHECK(d == doctest::Approx(1.0).epsilon(0.2));
    }
    SUBCASE("only duplicates -> error") {
        PointCloud cloud;
        cloud.data = Eigen::MatrixXd::Ones(10, 2);
        CHECK_THROWS_AS(twonn_dimension(cloud, Metric::Euclidean), Error);
    }
    SUBCASE("invariant under uniform scaling") {
        const PointCloud cloud = oracle::square_cloud(300, 2, 4);
        PointCloud scaled = cloud;
        scaled.data *= 37.5;
        CHECK(twonn_dimension(cloud, Metric::Euclidean) ==
              doctest::Approx(twonn_dimension(scaled, Metric::Euclidean))
                  .epsilon(1e-12));
    }
    SUBCASE("duplicates dropped, not fatal, when distinct points remain") {
        PointCloud cloud = oracle::square_cloud(200, 2, 6);
        cloud.data.row(0) = cloud.data.row(1);
        CHECK(twonn_dimension(cloud, Metric::Euclidean) ==
              doctest::Approx(2.0).epsilon(0.3));
    }
}

TEST_CASE("pca_fo_dimension") {
    SpectrumSummary s;
    SUBCASE("spectrum (4,3,1,0.1) alpha 0.5 -> 2") {
        s.eigenvalues = Eigen::Vector4d(4.0, 3.0, 1.0, 0.1);
        CHECK(pca_fo_dimension(s, 0.5) == 2);
    }
    SUBCASE("isotropic 3-D -> 3") {
        s.eigenvalues = Eigen::Vector3d(1.0, 1.0, 1.0);
        CHECK(pca_fo_dimension(s, 0.5) == 3);
    }
    SUBCASE("(1,0,0) -> 1") {
        s.eigenvalues = Eigen::Vector3d(1.0, 0.0, 0.0);
        CHECK(pca_fo_dimension(s, 0.5) == 1);
    }
    SUBCASE("all-zero -> error") {
        s.eigenvalues = Eigen::Vector3d::Zero();
        CHECK_THROWS_AS(pca_fo_dimension(s, 0.5), Error);
    }
}

TEST_CASE("effective_rank") {
    SpectrumSummary s;
    SUBCASE("d equal eigenvalues -> d") {
        s.eigenvalues = Eigen::VectorXd::Constant(7, 0.3);
        CHECK(effective_rank(s) == doctest::Approx(7.0).epsilon(1e-12));
    }
    SUBCASE("(0.5, 0.5, 0) -> 2") {
        s.eigenvalues = Eigen::Vector3d(0.5, 0.5, 0.0);
        CHECK(effective_rank(s) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("single nonzero -> 1") {
        s.eigenvalues = Eigen::Vector3d(0.9, 0.0, 0.0);
        CHECK(effective_rank(s) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("1 <= effective_rank <= D on random spectra") {
        std::mt19937_64 rng(77);
        for (int t = 0; t < 20; ++t) {
            s.eigenvalues = Eigen::VectorXd(5);
            for (int i = 0; i < 5; ++i) s.eigenvalues(i) = uniform01(rng);
            std::sort(s.eigenvalues.data(), s.eigenvalues.data() + 5,
                      std::greater<double>());
            const double er = effective_rank(s);
            CHECK(er >= 1.0 - 1e-12);
            CHECK(er <= 5.0 + 1e-12);
        }
    }
    SUBCASE("zero total variance -> error") {
        s.eigenvalues = Eigen::Vector3d::Zero();
        CHECK_THROWS_AS(effective_rank(s), Error);
    }
}

TEST_CASE("isoscore") {
    SUBCASE("isotropic gaussian 5000x10 >= 0.95") {
        CHECK(isoscore(oracle::gaussian_cloud(5000, 10, 21)) >= 0.95);
    }
    SUBCASE("all variance on one axis in 10-D <= 0.05") {
        PointCloud cloud;
        cloud.data = Eigen::MatrixXd::Zero(5000, 10);
        std::mt19937_64 rng(3);
        for (Eigen::Index i = 0; i < cloud.data.rows(); ++i)
            cloud.data(i, 0) = gaussian(rng);
        CHECK(isoscore(cloud) <= 0.05);
    }
    SUBCASE("identity covariance construction -> 1") {
        // Four-point cross has exactly identity-proportional covariance.
        PointCloud cloud = from_rows(
            {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
        CHECK(isoscore(cloud) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("bounded in [0,1] and monotone as variance concentrates") {
        double prev = 1.1;
        for (double eps : {1.0, 0.6, 0.3, 0.1, 0.01}) {
            PointCloud cloud;
            cloud.data = Eigen::MatrixXd::Zero(4000, 6);
            std::mt19937_64 rng(17);
            for (Eigen::Index i = 0; i < cloud.data.rows(); ++i)
                for (Eigen::Index j = 0; j < 6; ++j)
                    cloud.data(i, j) = (j < 2 ? 1.0 : eps) * gaussian(rng);
            const double score = isoscore(cloud);
            CHECK(score >= 0.0);
            CHECK(score <= 1.0);
            CHECK(score < prev);
            prev = score;
        }
    }
    SUBCASE("invariant under orthogonal maps and scaling") {
        const PointCloud cloud = oracle::gaussian_cloud(800, 4, 9);
        Eigen::MatrixXd q = Eigen::MatrixXd::Random(4, 4);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
        q = qr.householderQ();
        PointCloud rotated;
        rotated.data = cloud.data * q * 3.7;
        CHECK(isoscore(cloud) == doctest::Approx(isoscore(rotated)).epsilon(1e-6));
        SpectrumSummary a = covariance_spectrum(cloud);
        SpectrumSummary b = covariance_spectrum(rotated);
        b.eigenvalues /= 3.7 * 3.7;
        CHECK(effective_rank(a) == doctest::Approx(effective_rank(b)).epsilon(1e-6));
    }
}
