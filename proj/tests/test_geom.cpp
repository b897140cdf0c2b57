#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "varsample/geom.hpp"

using namespace vs;

namespace {

TrackSettings fast_settings(std::uint64_t seed = 0) {
    TrackSettings s;
    s.rng_seed = seed;
    s.workers = 2;
    return s;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

bool contains_point(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& q,
                    double tol = 1e-7) {
    for (const auto& p : pts)
        if ((p - q).norm() <= tol) return true;
    return false;
}

// critical points of the squared distance from q to the ellipse
// (2 cos t, sin t), by sign changes of the derivative on a dense grid
std::vector<Eigen::VectorXd> ellipse_distance_critical(const Eigen::Vector2d& q) {
    const int N = 1000000;
    auto deriv = [&](double t) {
        double x = 2 * std::cos(t), y = std::sin(t);
        double dx = -2 * std::sin(t), dy = std::cos(t);
        return (x - q[0]) * dx + (y - q[1]) * dy;
    };
    std::vector<Eigen::VectorXd> crit;
    double prev = deriv(0.0);
    for (int i = 1; i <= N; ++i) {
        double t = 2.0 * M_PI * i / N;
        double cur = deriv(t);
        if (prev == 0.0 || (prev < 0) != (cur < 0)) {
            double lo = 2.0 * M_PI * (i - 1) / N, hi = t;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                if ((deriv(lo) < 0) != (deriv(mid) < 0)) hi = mid;
                else lo = mid;
            }
            double tm = 0.5 * (lo + hi);
            crit.push_back(vec2(2 * std::cos(tm), std::sin(tm)));
        }
        prev = cur;
    }
    return crit;
}

}  // namespace

TEST_CASE("normal locus: unit circle from (2, 0)") {
    PolySystem F = parse_system("x^2 + y^2 - 1");
    NormalLocus nl = normal_locus(F, vec2(2.0, 0.0), fast_settings());
    REQUIRE(nl.critical_points.size() == 2);
    CHECK(contains_point(nl.critical_points, vec2(1.0, 0.0)));
    CHECK(contains_point(nl.critical_points, vec2(-1.0, 0.0)));
    CHECK(nl.edd_observed >= 2);
}

TEST_CASE("normal locus: ellipse has EDD 4 and matches the parametric oracle") {
    PolySystem F = parse_system("0.25*x^2 + y^2 - 1");
    Eigen::Vector2d q(0.37, 0.21);  // generic inner point
    NormalLocus nl = normal_locus(F, vec2(q[0], q[1]), fast_settings(2));
    CHECK(nl.edd_observed == 4);

    auto expected = ellipse_distance_critical(q);
    REQUIRE(expected.size() == nl.critical_points.size());
    for (const auto& e : expected) CHECK(contains_point(nl.critical_points, e, 1e-5));
}

TEST_CASE("normal locus: circle center is degenerate") {
    PolySystem F = parse_system("x^2 + y^2 - 1");
    CHECK_THROWS_AS(normal_locus(F, vec2(0.0, 0.0), fast_settings()), numeric_error);
}

TEST_CASE("bounding box: circle and sphere") {
    PolySystem F = parse_system("x^2 + y^2 - 1");
    Eigen::VectorXd q = vec2(0.3, 0.1);
    Box box = bounding_box(F, fast_settings(), q);
    double expect = (1.0 + q.norm()) * 1.01;
    CHECK(box.half_width == doctest::Approx(expect).epsilon(1e-6));
    CHECK(box.center == q);

    PolySystem S2 = parse_system("x^2 + y^2 + z^2 - 1");
    Eigen::VectorXd q3(3);
    q3 << 0.2, -0.3, 0.1;
    Box b3 = bounding_box(S2, fast_settings(4), q3);
    CHECK(b3.half_width == doctest::Approx((1.0 + q3.norm()) * 1.01).epsilon(1e-6));
}

TEST_CASE("bounding box: empty real variety") {
    PolySystem F = parse_system("x^2 + y^2 + 1");
    CHECK_THROWS_AS(bounding_box(F, fast_settings()), numeric_error);
}

TEST_CASE("slice: circle by vertical lines") {
    PolySystem F = parse_system("x^2 + y^2 - 1");
    auto pts = slice(F, {0}, Eigen::VectorXd::Zero(1), fast_settings());
    REQUIRE(pts.size() == 2);
    CHECK(contains_point(pts, vec2(0.0, 1.0)));
    CHECK(contains_point(pts, vec2(0.0, -1.0)));

    auto empty = slice(F, {0}, Eigen::VectorXd::Constant(1, 2.0), fast_settings());
    CHECK(empty.empty());

    // non-square slicing is rejected here (the extra sample composes the
    // normal locus instead)
    PolySystem S2 = parse_system("x^2 + y^2 + z^2 - 1");
    CHECK_THROWS_AS(slice(S2, {0}, Eigen::VectorXd::Constant(1, 0.5), fast_settings()),
                    input_error);
    auto two = slice(S2, {0, 1}, Eigen::VectorXd::Zero(2), fast_settings());
    CHECK(two.size() == 2);  // x = y = 0 meets the sphere at z = +-1
}

TEST_CASE("slice: degree-8 curve against the univariate oracle") {
    PolySystem F = parse_system("(x^3 - x*y^2 + y + 1)^2 * (x^2 + y^2 - 1) + y^2 - 5");
    auto pts = slice(F, {0}, Eigen::VectorXd::Zero(1), fast_settings());

    // x = 0: (y+1)^2 (y^2-1) + y^2 - 5 = y^4 + 2y^3 + y^2 - 2y - 6
    std::vector<std::complex<double>> coeffs{-6.0, -2.0, 1.0, 2.0, 1.0};
    auto roots = oracle::real_roots(coeffs);
    REQUIRE(pts.size() == roots.size());
    std::vector<double> ys;
    for (const auto& p : pts) ys.push_back(p[1]);
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 0; i < roots.size(); ++i)
        CHECK(ys[i] == doctest::Approx(roots[i]).epsilon(1e-8));
}

TEST_CASE("bottlenecks: ellipse axis pairs") {
    PolySystem F = parse_system("0.25*x^2 + y^2 - 1");
    BottleneckReport rep = bottlenecks(F, fast_settings());
    CHECK(rep.finite);
    REQUIRE(rep.b2.has_value());
    CHECK(*rep.b2 == doctest::Approx(1.0).epsilon(1e-6));
    REQUIRE(rep.pairs.size() == 2);  // unordered pairs recorded once

    std::vector<double> radii{rep.pairs[0].radius, rep.pairs[1].radius};
    std::sort(radii.begin(), radii.end());
    CHECK(radii[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(radii[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(*rep.min_pair_distance == doctest::Approx(2.0).epsilon(1e-6));

    // validated endpoints: on X and rank conditions hold
    for (const auto& p : rep.pairs) {
        CHECK(F.residual(p.x) <= 1e-8);
        CHECK(F.residual(p.y) <= 1e-8);
        Eigen::MatrixXd Mx(2, 2);
        Mx.row(0) = (p.x - p.y).transpose().normalized();
        Mx.row(1) = F.jacobian_real(p.x).row(0).normalized();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Mx);
        CHECK(svd.singularValues()(1) <= 1e-6);
    }
    CHECK(rep.wfs_declared.has_value());
    CHECK(*rep.wfs_declared == *rep.b2);
    CHECK(rep.wfs_is_fallback);
}

TEST_CASE("bottlenecks: unit circle is a continuum") {
    PolySystem F = parse_system("x^2 + y^2 - 1");
    BottleneckReport rep = bottlenecks(F, fast_settings());
    CHECK(!rep.finite);
    CHECK(!rep.b2.has_value());
    CHECK(!rep.diagnosis.empty());
}

TEST_CASE("bottlenecks: wfs override wins over fallback") {
    PolySystem F = parse_system("0.25*x^2 + y^2 - 1");
    BottleneckReport rep = bottlenecks(F, fast_settings(), std::nullopt, 0.75);
    CHECK(*rep.wfs_declared == 0.75);
    CHECK(!rep.wfs_is_fallback);
}
