#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "varsample/reach.hpp"

using namespace vs;

namespace {

TrackSettings fast_settings(std::uint64_t seed = 0) {
    TrackSettings s;
    s.rng_seed = seed;
    s.workers = 2;
    return s;
}

// spectral norm by power iteration on M^T M, independent of Eigen's SVD
double spectral_norm_oracle(const Eigen::MatrixXd& M) {
    Eigen::MatrixXd G = M.transpose() * M;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(G.rows()).normalized();
    double lambda = 0;
    for (int it = 0; it < 400; ++it) {
        v = (G * v).normalized();
        lambda = v.dot(G * v);
    }
    return std::sqrt(lambda);
}

Eigen::VectorXd sphere_point(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v / v.norm();
}

}  // namespace

TEST_CASE("mu_norm: x1*x2 on the unit circle") {
    PolySystem F = parse_system("x1*x2", std::vector<std::string>{"x1", "x2"});
    Eigen::VectorXd x(2);
    x << 1.0, 0.0;
    CHECK(mu_norm(F, x) == doctest::Approx(1.0).epsilon(1e-12));

    // against the independent assembly: ||F|| * sigma_max(DF^+ Delta)
    Eigen::MatrixXd DF = F.jacobian_real(x);
    Eigen::MatrixXd pinv = DF.transpose() * (DF * DF.transpose()).inverse();
    Eigen::MatrixXd M = pinv * std::sqrt(2.0);
    CHECK(mu_norm(F, x) ==
          doctest::Approx(weil_norm(F.polys()) * spectral_norm_oracle(M)).epsilon(1e-10));

    // errors: off sphere, singular point
    Eigen::VectorXd off(2);
    off << 1.1, 0.0;
    CHECK_THROWS_AS(mu_norm(F, off), input_error);
    PolySystem G = parse_system("x1^2 - x2^2", std::vector<std::string>{"x1", "x2"});
    Eigen::VectorXd diag(2);
    diag << std::sqrt(0.5), std::sqrt(0.5);
    CHECK(mu_norm(G, diag) > 0);  // regular point fine
    CHECK_THROWS_AS(mu_norm(parse_system("x1^2", std::vector<std::string>{"x1", "x2"}),
                            Eigen::VectorXd(Eigen::Vector2d(0.0, 1.0))),
                    numeric_error);
    CHECK_THROWS_AS(mu_norm(parse_system("x1^2 - 1", std::vector<std::string>{"x1", "x2"}),
                            x),
                    input_error);  // not homogeneous
}

TEST_CASE("mu_norm: invariant under scaling of F") {
    PolySystem F = parse_system("x1*x2 + 3*x2^2 - x3^2",
                                std::vector<std::string>{"x1", "x2", "x3"});
    PolySystem cF = parse_system("-3.5*x1*x2 - 10.5*x2^2 + 3.5*x3^2",
                                 std::vector<std::string>{"x1", "x2", "x3"});
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd x = sphere_point(rng, 3);
        if (std::abs(F.poly(0).evaluate(x.cast<std::complex<double>>()).real()) > 0.5)
            continue;  // mu is defined off X too, but stay in a sane region
        CHECK(mu_norm(F, x) == doctest::Approx(mu_norm(cF, x)).epsilon(1e-10));
    }
}

TEST_CASE("mu_norm: orthogonal invariance") {
    PolySystem F = parse_system("x1*x2 + x2^2 - 2*x3*x1",
                                std::vector<std::string>{"x1", "x2", "x3"});
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int t = 0; t < 5; ++t) {
        Eigen::MatrixXd A(3, 3);
        for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = g(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
        Eigen::MatrixXd R = qr.householderQ();

        // F o R^T via exact composition with the double entries of R^T
        std::vector<std::vector<Rational>> M(3, std::vector<Rational>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M[i][j] = Rational(R(j, i));
        PolySystem FR({F.poly(0).compose_linear(M)}, F.var_names());

        Eigen::VectorXd x = sphere_point(rng, 3);
        Eigen::VectorXd Rx = (R * x).normalized();
        CHECK(mu_norm(FR, Rx) == doctest::Approx(mu_norm(F, x)).epsilon(1e-8));
    }
}

TEST_CASE("eta_from_mu arithmetic") {
    CHECK(eta_from_mu(1.0, 2) == doctest::Approx(1.0 / (14.0 * std::sqrt(2.0))));
    CHECK(eta_from_mu(1.0, 2) == doctest::Approx(0.0505).epsilon(1e-2));
    CHECK(eta_from_mu(1.0, 1) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("split_on_sphere") {
    PolySystem F = parse_system("x*y + y^2 - 2*z*w; x^2 + y^2 + z^2 + w^2 - 1",
                                std::vector<std::string>{"x", "y", "z", "w"});
    SphereSplit split = split_on_sphere(F);
    CHECK(split.sphere_index == 1);
    CHECK(split.forms.size() == 1);
    CHECK(split.forms.poly(0).is_homogeneous());

    // sphere alone: the quadratic form with q = 1
    PolySystem S3 = parse_system("x^2 + y^2 + z^2 + w^2 - 1");
    SphereSplit ss = split_on_sphere(S3);
    CHECK(ss.forms.size() == 1);
    CHECK(ss.forms.poly(0).degree() == 2);
    CHECK(ss.forms.poly(0).term_count() == 4);

    // affine inputs are rejected
    CHECK_THROWS_AS(split_on_sphere(parse_system("0.25*x^2 + y^2 - 1")), input_error);
    CHECK_THROWS_AS(
        split_on_sphere(parse_system("x*y - x; x^2 + y^2 + z^2 - 1",
                                     std::vector<std::string>{"x", "y", "z"})),
        input_error);
}

TEST_CASE("eta is constant on the sphere and below the true reach") {
    PolySystem S3 = parse_system("x^2 + y^2 + z^2 - 1");
    SphereSplit split = split_on_sphere(S3);
    std::mt19937_64 rng(23);
    double first = -1;
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd x = sphere_point(rng, 3);
        double h = eta(split.forms, x);
        CHECK(h <= 1.0);  // reach of the unit sphere
        if (first < 0) first = h;
        CHECK(h == doctest::Approx(first).epsilon(1e-12));
    }
    // ||F|| = sqrt(3), ||DF^+|| = 1/2 on the sphere
    CHECK(first == doctest::Approx(1.0 / (7.0 * std::pow(2.0, 1.5) * std::sqrt(3.0) / 2.0)));
}

TEST_CASE("reach lower bound: sphere in R3, single pass") {
    PolySystem S3 = parse_system("x^2 + y^2 + z^2 - 1");
    TrackSettings s = fast_settings(6);
    TotalSampleOptions opts;
    opts.b2_override = 1.0;  // antipodal continuum
    ReachEstimate est = reach_lower_bound(S3, 0.05, s, opts);
    CHECK(est.iterations == 1);
    CHECK(est.epsilon == 0.05);
    double eta_const = 1.0 / (7.0 * std::pow(2.0, 1.5) * std::sqrt(3.0) / 2.0);
    CHECK(est.m == doctest::Approx(eta_const).epsilon(1e-9));
    CHECK(est.lower_bound == doctest::Approx(eta_const - 0.05).epsilon(1e-6));
    CHECK(est.lower_bound > 0);
    CHECK(est.sample_certified);
    CHECK(est.per_point.size() == est.sample.points.size());

    // a larger epsilon0 needs one halving more and shifts the bound by
    // exactly the epsilon difference (m is constant on the sphere)
    ReachEstimate est2 = reach_lower_bound(S3, 0.1, s, opts);
    CHECK(est2.iterations == 2);
    CHECK(est2.epsilon == doctest::Approx(0.05));
    CHECK(est2.lower_bound == doctest::Approx(est.lower_bound).epsilon(1e-9));

    // affine inputs are unsupported
    CHECK_THROWS_AS(reach_lower_bound(parse_system("0.25*x^2 + y^2 - 1"), 0.1, s), input_error);
}

TEST_CASE("reach lower bound: iteration cap") {
    PolySystem S3 = parse_system("x^2 + y^2 + z^2 - 1");
    TrackSettings s = fast_settings(6);
    s.max_paths = 40'000'000;
    TotalSampleOptions opts;
    opts.b2_override = 1.0;
    opts.delta_override = 0.2;  // fixed coarse grid, sample reused across halvings
    CHECK_THROWS_AS(reach_lower_bound(S3, 1000.0, s, opts), numeric_error);
}
