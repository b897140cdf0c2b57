#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "varsample/polynomial.hpp"

using namespace vs;
using cd = std::complex<double>;

namespace {

Eigen::VectorXcd cvec(std::initializer_list<cd> vals) {
    Eigen::VectorXcd v(static_cast<int>(vals.size()));
    int i = 0;
    for (auto x : vals) v[i++] = x;
    return v;
}

const std::vector<std::string> kXYZW = {"x", "y", "z", "w"};
const std::vector<std::string> kXY = {"x", "y"};

// random dense polynomial for property tests
Polynomial random_poly(std::mt19937_64& rng, int nvars, int deg, bool homogeneous = false) {
    std::uniform_int_distribution<int> e(0, deg);
    std::uniform_int_distribution<long> c(-9, 9);
    Polynomial p(nvars);
    for (int t = 0; t < 12; ++t) {
        Exponents a(nvars, 0);
        int total = 0;
        for (int i = 0; i < nvars; ++i) {
            a[i] = e(rng);
            total += a[i];
        }
        if (total > deg) continue;
        if (homogeneous && total != deg) {
            a[0] += deg - total;
        }
        long ci = c(rng);
        if (ci) p.add_term(a, ci);
    }
    if (p.is_zero()) p.add_term(Exponents(nvars, 0), 1);
    return p;
}

}  // namespace

TEST_CASE("parse: circle") {
    PolySystem F = parse_system("x^2 + y^2 - 1");
    CHECK(F.size() == 1);
    CHECK(F.num_vars() == 2);
    CHECK(F.poly(0).degree() == 2);
    CHECK(F.poly(0).term_count() == 3);
    CHECK(F.var_names() == kXY);
}

TEST_CASE("parse: quadric and sphere in four variables") {
    PolySystem F = parse_system("x*y + y^2 - 2*z*w; x^2 + y^2 + z^2 + w^2 - 1",
                                std::vector<std::string>{"x", "y", "z", "w"});
    CHECK(F.size() == 2);
    CHECK(F.num_vars() == 4);
    CHECK(F.degrees() == std::vector<int>{2, 2});
}

TEST_CASE("parse: degree-8 plane curve") {
    PolySystem F = parse_system("(x^3 - x*y^2 + y + 1)^2 * (x^2 + y^2 - 1) + y^2 - 5");
    CHECK(F.size() == 1);
    CHECK(F.num_vars() == 2);
    CHECK(F.poly(0).degree() == 8);
}

TEST_CASE("parse: decimal literals are exact rationals") {
    PolySystem F = parse_system("0.13*x + 2.5");
    Exponents x{1};
    CHECK(F.poly(0).coefficient(x) == Rational(13, 100));
    CHECK(F.poly(0).coefficient(Exponents{0}) == Rational(5, 2));
    // doubles convert exactly too
    CHECK(Rational(0.5) == Rational(1, 2));
    CHECK(Rational(0.1) != Rational(1, 10));  // 0.1 is not exactly 1/10
}

TEST_CASE("parse: errors carry position and kind") {
    CHECK_THROWS_AS(parse_system(""), input_error);
    CHECK_THROWS_AS(parse_system("x^2 + ; y"), parse_error);
    CHECK_THROWS_AS(parse_system("2x"), parse_error);          // implicit multiplication
    CHECK_THROWS_AS(parse_system("x*(y+1"), parse_error);      // unbalanced
    CHECK_THROWS_AS(parse_system("x + q", std::vector<std::string>{"x", "y"}), parse_error);
    try {
        parse_system("x + y\n y^");
        CHECK(false);
    } catch (const parse_error& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    // "xy" is a single identifier, not x*y
    PolySystem F = parse_system("xy + y^2");
    CHECK(F.num_vars() == 2);
    CHECK(F.var_names()[0] == "xy");
}

TEST_CASE("evaluate: examples") {
    PolySystem circle = parse_system("x^2 + y^2 - 1");
    CHECK(circle.evaluate(cvec({1.0, 0.0}))[0] == cd(0.0, 0.0));
    CHECK(circle.evaluate(cvec({2.0, 0.0}))[0] == cd(3.0, 0.0));

    PolySystem curve = parse_system("(x^3 - x*y^2 + y + 1)^2 * (x^2 + y^2 - 1) + y^2 - 5");
    CHECK(curve.evaluate(cvec({0.0, 0.0}))[0].real() == doctest::Approx(-6.0));

    CHECK_THROWS_AS(circle.evaluate(cvec({1.0, 0.0, 0.0})), input_error);
}

TEST_CASE("jacobian: examples") {
    PolySystem circle = parse_system("x^2 + y^2 - 1");
    Eigen::MatrixXcd J = circle.jacobian(cvec({1.0, 0.0}));
    CHECK(J(0, 0) == cd(2.0, 0.0));
    CHECK(J(0, 1) == cd(0.0, 0.0));

    PolySystem sys = parse_system("x*y + y^2 - 2*z*w; x^2 + y^2 + z^2 + w^2 - 1",
                                  std::vector<std::string>{"x", "y", "z", "w"});
    Eigen::MatrixXcd Js = sys.jacobian(cvec({0.0, 0.0, 0.0, 1.0}));
    CHECK(Js(1, 0) == cd(0.0, 0.0));
    CHECK(Js(1, 3) == cd(2.0, 0.0));

    Eigen::MatrixXcd Jq = sys.jacobian(cvec({1.0, 1.0, 1.0, 1.0}));
    CHECK(Jq(0, 0) == cd(1.0, 0.0));
    CHECK(Jq(0, 1) == cd(3.0, 0.0));
    CHECK(Jq(0, 2) == cd(-2.0, 0.0));
    CHECK(Jq(0, 3) == cd(-2.0, 0.0));
}

TEST_CASE("jacobian matches central finite differences") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(trial % 3);
        std::vector<Polynomial> polys{random_poly(rng, n, 4), random_poly(rng, n, 3)};
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
        PolySystem F(polys, names);

        Eigen::VectorXcd x(n);
        for (int i = 0; i < n; ++i) x[i] = cd(u(rng), u(rng));
        Eigen::MatrixXcd J = F.jacobian(x);
        for (int i = 0; i < F.size(); ++i) {
            for (int j = 0; j < n; ++j) {
                Eigen::VectorXcd xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                cd fd = (F.evaluate(xp)[i] - F.evaluate(xm)[i]) / (2.0 * h);
                double scale = std::max(1.0, std::abs(J(i, j)));
                CHECK(std::abs(fd - J(i, j)) / scale <= 1e-7);
            }
        }
    }
}

TEST_CASE("printer: canonical graded-lex round trip") {
    for (const char* src :
         {"x^2 + y^2 - 1", "x*y + y^2 - 2*z*w; x^2 + y^2 + z^2 + w^2 - 1",
          "(x^3 - x*y^2 + y + 1)^2 * (x^2 + y^2 - 1) + y^2 - 5", "0.13*x - 2.5*y + 1",
          "-x^3 + 0.5"}) {
        PolySystem F = parse_system(src);
        std::string printed = print_system(F);
        PolySystem G = parse_system(printed, F.var_names());
        REQUIRE(F.size() == G.size());
        for (int i = 0; i < F.size(); ++i) CHECK(F.poly(i) == G.poly(i));
    }
    PolySystem F = parse_system("y^2 + x^2 + x*y - 1");
    CHECK(print_polynomial(F.poly(0), F.var_names()) == "x^2 + x*y + y^2 - 1");
}

TEST_CASE("weil norm: examples and properties") {
    PolySystem F = parse_system("x^2 + y^2; x*y");
    CHECK(weil_norm(F.poly(0)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(weil_norm(F.poly(1)) == doctest::Approx(std::sqrt(0.5)));
    CHECK(weil_norm(F.polys()) == doctest::Approx(std::sqrt(2.5)));

    CHECK_THROWS_AS(weil_norm(parse_system("x^2 + y").poly(0)), input_error);

    // invariance under simultaneous variable permutation
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Polynomial p = random_poly(rng, 3, 4, true);
        std::vector<int> perm{0, 1, 2};
        std::shuffle(perm.begin(), perm.end(), rng);
        Polynomial q = p.reindex(perm, 3);
        CHECK(weil_norm(p) == doctest::Approx(weil_norm(q)).epsilon(1e-12));
    }
}

TEST_CASE("evaluate distributes over products") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Polynomial p = random_poly(rng, 2, 4);
        Polynomial q = random_poly(rng, 2, 3);
        Polynomial pq = p * q;
        Eigen::VectorXcd x = cvec({cd(u(rng), u(rng)), cd(u(rng), u(rng))});
        cd lhs = pq.evaluate(x);
        cd rhs = p.evaluate(x) * q.evaluate(x);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("homogenize appends a fresh variable") {
    PolySystem F = parse_system("x^2 + y - 3");
    Polynomial h = F.poly(0).homogenize();
    CHECK(h.num_vars() == 3);
    CHECK(h.is_homogeneous());
    CHECK(h.degree() == 2);
    // h(x, y, 1) == f(x, y)
    Eigen::VectorXcd z = cvec({cd(1.7, 0), cd(-0.4, 0), cd(1.0, 0)});
    Eigen::VectorXcd xy = cvec({cd(1.7, 0), cd(-0.4, 0)});
    CHECK(std::abs(h.evaluate(z) - F.poly(0).evaluate(xy)) < 1e-14);
}

TEST_CASE("compose_linear substitutes exactly") {
    PolySystem F = parse_system("x^2 - y");
    // x <- 2u + v, y <- u - 1*v  (exact rationals)
    std::vector<std::vector<Rational>> M{{Rational(2), Rational(1)},
                                         {Rational(1), Rational(-1)}};
    Polynomial g = F.poly(0).compose_linear(M);
    Eigen::VectorXcd uv = cvec({cd(0.3, 0.2), cd(-1.1, 0.7)});
    cd x = 2.0 * uv[0] + uv[1];
    cd y = uv[0] - uv[1];
    cd expect = x * x - y;
    CHECK(std::abs(g.evaluate(uv) - expect) < 1e-12);
}

TEST_CASE("zero-coefficient terms are never stored") {
    PolySystem F = parse_system("x^2 - x^2 + y");
    CHECK(F.poly(0).term_count() == 1);
    CHECK(F.poly(0).degree() == 1);
    Polynomial zero = F.poly(0) - F.poly(0);
    CHECK(zero.is_zero());
    CHECK(zero.degree() == 0);
}
