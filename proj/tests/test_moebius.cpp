#include <bsthermo/moebius.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace bsthermo;
using M = MoebiusTransform<double>;
using C = std::complex<double>;

namespace {

M random_map(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    C c(0.8 * u(rng), 0.8 * u(rng));
    if (std::abs(c) > 0.9) c *= 0.5;
    return compose(M::to_point(c), M::rotation(3 * u(rng)));
}

// plain matrix action, independent of the class
C apply_matrix(const M& g, C z) { return (g.a * z + g.b) / (std::conj(g.b) * z + std::conj(g.a)); }

double angular_gap(double x, double y) { return std::min(ccw_dist(x, y), ccw_dist(y, x)); }

// hyperbolic length of the segment [0, r] by Simpson's rule on 2 / (1 - s^2)
double integrated_distance(double r) {
    const int n = 20000;
    double h = r / n, s = 0;
    for (int i = 0; i <= n; ++i) {
        double x = i * h, w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        s += w * 2 / (1 - x * x);
    }
    return s * h / 3;
}

}  // namespace

TEST(Moebius, ComposeMatchesMatrixAction) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        M g = random_map(rng), h = random_map(rng);
        C z(0.3, -0.2);
        EXPECT_LT(std::abs(compose(g, h)(z) - apply_matrix(g, apply_matrix(h, z))), 1e-12);
        EXPECT_NEAR(compose(g, h).det(), 1.0, 1e-12);
    }
}

TEST(Moebius, InverseUndoes) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 50; ++k) {
        M g = random_map(rng);
        EXPECT_LT(compose(g, g.inverse()).distance_to(M()), 1e-12);
        double t = 0.1 * k;
        EXPECT_LT(angular_gap(g.inverse().act(g.act(t)), t), 1e-11);
    }
}

TEST(Moebius, DistanceMatchesMetricIntegral) {
    for (double r : {0.1, 0.5, 0.9, 0.99}) {
        M g = M::to_point(C(0, r));
        EXPECT_NEAR(g.dist_origin(), integrated_distance(r), 1e-8) << r;
        EXPECT_NEAR(M::axial(1.7).dist_origin(), 1.7, 1e-13);
    }
}

TEST(Moebius, BoundaryDerivativeMatchesFiniteDifference) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 30; ++k) {
        M g = random_map(rng);
        double t = 0.2 * k, h = 1e-6;
        double fd = ccw_dist(g.act(t - h), g.act(t + h)) / (2 * h);
        EXPECT_NEAR(g.boundary_derivative(t), fd, 1e-6 * fd);
        EXPECT_NEAR(g.log_boundary_derivative(t), std::log(fd), 1e-6);
    }
}

TEST(Moebius, DerivativeRangeBracketsSamples) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 30; ++k) {
        M g = random_map(rng);
        Arc<double> A(0.37 * k, 0.1 + 0.15 * (k % 7));
        auto [lo, hi] = derivative_range(g, A);
        double smin = 1e300, smax = 0;
        for (int i = 0; i <= 2000; ++i) {
            double d = g.boundary_derivative(A.start + A.length * i / 2000);
            smin = std::min(smin, d), smax = std::max(smax, d);
        }
        EXPECT_LE(lo, smin * (1 + 1e-12));
        EXPECT_GE(hi, smax * (1 - 1e-12));
        EXPECT_NEAR(lo, smin, 1e-4 * smin);
        EXPECT_NEAR(hi, smax, 1e-4 * smax);
    }
}

TEST(Moebius, ImageOfArcMapsEndpoints) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        M g = random_map(rng);
        Arc<double> A(0.5 * k, 1.2);
        auto B = image(g, A);
        EXPECT_LT(angular_gap(B.start, g.act(A.start)), 1e-11);
        EXPECT_TRUE(B.contains(g.act(A.start + 0.6)));
        EXPECT_NEAR(B.length, ccw_dist(g.act(A.start), g.act(A.end())), 1e-11);
    }
}

TEST(Moebius, ArcsAreHalfOpen) {
    Arc<double> A(1.0, 0.5);
    EXPECT_TRUE(A.contains(1.0));
    EXPECT_TRUE(A.contains(1.4999));
    EXPECT_FALSE(A.contains(1.5));
    Arc<double> W(6.0, 0.6);  // wraps through 0
    EXPECT_TRUE(W.contains(0.1));
    EXPECT_FALSE(W.contains(0.4));
}

TEST(Moebius, ArcIntersection) {
    auto c = intersect<double>(Arc<double>(0.0, 1.0), Arc<double>(0.5, 1.0), 1e-12);
    ASSERT_TRUE(c);
    EXPECT_NEAR(c->start, 0.5, 1e-14);
    EXPECT_NEAR(c->length, 0.5, 1e-14);
    EXPECT_FALSE(intersect<double>(Arc<double>(0.0, 1.0), Arc<double>(2.0, 1.0), 1e-12));
}

TEST(Moebius, Classification) {
    EXPECT_EQ(classify(M()).kind, MoebiusKind::identity);
    EXPECT_EQ(classify(M::rotation(0.7)).kind, MoebiusKind::elliptic);
    EXPECT_EQ(classify(M::axial(0.7)).kind, MoebiusKind::hyperbolic);
    // z -> z + 1 on the half plane, moved to the disk: trace 2
    M p(C(1, 0.5), C(0, 0.5));
    EXPECT_NEAR(p.det(), 1.0, 1e-15);
    EXPECT_EQ(classify(p).kind, MoebiusKind::parabolic);
}

TEST(Moebius, GeodesicIntersection) {
    // the two diameters meet at the origin
    auto z = geodesic_intersection<double>(0.0, pi_v<double>(), pi_v<double>() / 2, 3 * pi_v<double>() / 2);
    ASSERT_TRUE(z);
    EXPECT_LT(std::abs(*z), 1e-12);
    // unlinked endpoints do not meet
    EXPECT_FALSE(geodesic_intersection<double>(0.0, 0.5, 1.0, 1.5));
    Geodesic<double> g(0.3, 1.9);
    EXPECT_NEAR(g.orthogonality_defect(), 0.0, 1e-12);
}

TEST(Moebius, HighPrecisionAgreesWithDouble) {
    MoebiusTransform<Mp50> g = MoebiusTransform<Mp50>::axial(Mp50("0.9"));
    auto h = compose(g, MoebiusTransform<Mp50>::rotation(Mp50("1.1")));
    EXPECT_NEAR(double(h.dist_origin()), 0.9, 1e-15);
    EXPECT_NEAR(double(h.det()), 1.0, 1e-40);
}
