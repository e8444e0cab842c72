#include <doctest.h>

#include <cmath>

#include "cricci/oracles.hpp"
#include "cricci/rng.hpp"

using namespace cricci;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("geometry tags parse and round-trip") {
    CHECK(SmoothGeometry::parse("euclidean:3").dim == 3);
    SmoothGeometry s = SmoothGeometry::parse("sphere:2:0.5");
    CHECK(s.kind == SmoothGeometry::Kind::sphere);
    CHECK(s.radius == 0.5);
    SmoothGeometry t = SmoothGeometry::parse("torus:2:1.0,2.0");
    CHECK(t.periods[1] == 2.0);
    CHECK(SmoothGeometry::parse("ou:1").kind ==
          SmoothGeometry::Kind::gaussian_ou);
    CHECK(SmoothGeometry::parse(t.tag()).periods == t.periods);
    CHECK_THROWS_AS(SmoothGeometry::parse("klein:2"), Error);
    CHECK_THROWS_AS(SmoothGeometry::parse("sphere:0:1"), Error);
    CHECK_THROWS_AS(SmoothGeometry::parse("sphere:2:-1"), Error);
    CHECK_THROWS_AS(SmoothGeometry::parse("torus:2:1.0"), Error);
}

TEST_CASE("sphere distance, exp and log") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    Vector x(3), y(3);
    x << 1, 0, 0;
    y << 0, 1, 0;
    CHECK(s.distance(x, y) == doctest::Approx(kPi / 2).epsilon(1e-14));

    // exp is an isometry along the geodesic: |log(x, exp(x, V, s))| = s|V|
    auto rng = substream(5, 0);
    for (int trial = 0; trial < 25; ++trial) {
        Vector p = s.random_point(rng);
        Vector V = s.random_tangent(p, rng);
        const double step = 0.3 + 0.1 * static_cast<double>(trial % 5);
        Vector q = s.exp_map(p, V, step);
        CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.distance(p, q) == doctest::Approx(step).epsilon(1e-12));
        Vector w = s.log_map(p, q);
        CHECK(w.norm() == doctest::Approx(step).epsilon(1e-12));
        Vector q2 = s.exp_map(p, w, 1.0);
        CHECK((q2 - q).norm() < 1e-12);
    }
}

TEST_CASE("torus wraps distances and the cut locus") {
    SmoothGeometry t = SmoothGeometry::flat_torus(2, {1.0, 2.0});
    Vector x(2), y(2);
    x << 0.05, 0.1;
    y << 0.95, 0.1;
    CHECK(t.distance(x, y) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(t.in_cut_locus(x, y));
    Vector far(2);
    far << 0.55, 0.1; // displacement exactly half a period
    CHECK(t.in_cut_locus(x, far));
    CHECK_THROWS_AS(t.log_map(x, far), Error);

    Vector w = t.log_map(x, y);
    CHECK(w(0) == doctest::Approx(-0.1).epsilon(1e-12));
    Vector back = t.exp_map(x, w, 1.0);
    CHECK(t.distance(back, y) < 1e-12);
}

TEST_CASE("sphere cut locus at antipodes") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 2.0);
    Vector x(3), y(3);
    x << 2, 0, 0;
    y << -2, 0, 0;
    CHECK(s.in_cut_locus(x, y));
    CHECK_THROWS_AS(analytic_coarse_ricci(s, x, y), Error);
}

TEST_CASE("ricci form values and quadratic scaling") {
    auto rng = substream(8, 0);
    SmoothGeometry s = SmoothGeometry::sphere(3, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        Vector x = s.random_point(rng);
        Vector V = s.random_tangent(x, rng);
        const double base = s.ricci_form(x, V);
        CHECK(base == doctest::Approx(2.0 / 4.0 * V.squaredNorm())
                          .epsilon(1e-12));
        CHECK(s.ricci_form(x, 3.0 * V) ==
              doctest::Approx(9.0 * base).epsilon(1e-12));
    }
    SmoothGeometry e = SmoothGeometry::euclidean(4);
    Vector z = Vector::Zero(4), V = Vector::Ones(4);
    CHECK(e.ricci_form(z, V) == 0.0);
    SmoothGeometry ou = SmoothGeometry::gaussian_ou(2);
    Vector p(2), W(2);
    p << 0.3, -0.4;
    W << 1.0, 2.0;
    CHECK(ou.ricci_form(p, W) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("series branch of 1 - u cot u matches the direct formula") {
    for (double u : {0.099, 0.05, 0.01, 1e-4}) {
        const double direct = 1.0 - u * std::cos(u) / std::sin(u);
        CHECK(one_minus_ucotu(u) == doctest::Approx(direct).epsilon(1e-13));
    }
    CHECK(one_minus_ucotu(0.0) == 0.0);
    CHECK(one_minus_ucotu(1.3) ==
          doctest::Approx(1.0 - 1.3 * std::cos(1.3) / std::sin(1.3))
              .epsilon(1e-14));
}

TEST_CASE("analytic coarse Ricci closed forms") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    Vector x(3), y(3);
    x << 1, 0, 0;
    y << 0, 1, 0;
    const double u = kPi / 2; // d = pi/2, u cot u = 0
    CHECK(analytic_coarse_ricci(s, x, y) ==
          doctest::Approx(u * u + 1.0).epsilon(1e-12));

    SmoothGeometry e = SmoothGeometry::euclidean(2);
    Vector a(2), b(2);
    a << 0, 0;
    b << 3, 4;
    CHECK(analytic_coarse_ricci(e, a, b) == 0.0);

    SmoothGeometry ou = SmoothGeometry::gaussian_ou(1);
    Vector p(1), q(1);
    p << -0.5;
    q << 1.5;
    CHECK(analytic_coarse_ricci(ou, p, q) == doctest::Approx(4.0));

    SmoothGeometry t = SmoothGeometry::flat_torus(1, {1.0});
    Vector tp(1), tq(1);
    tp << 0.1;
    tq << 0.3;
    CHECK(analytic_coarse_ricci(t, tp, tq) == 0.0);
}

TEST_CASE("recovery reproduces the Ricci form") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    auto rng = substream(17, 0);
    for (int trial = 0; trial < 10; ++trial) {
        Vector x = s.random_point(rng);
        Vector V = s.random_tangent(x, rng);
        const double exact = s.ricci_form(x, V);
        const double rich =
            ricci_recovery(s, CurveProbe{x, V, 1e-2}, RecoveryMethod::richardson);
        const double fd = ricci_recovery(s, CurveProbe{x, V, 1e-2},
                                         RecoveryMethod::finite_difference);
        CHECK(std::abs(rich - exact) < 1e-8);
        CHECK(std::abs(fd - exact) < 1e-3);
        CHECK(std::abs(fd - exact) > std::abs(rich - exact));
    }
    Vector x(3), zero = Vector::Zero(3);
    x << 1, 0, 0;
    CHECK_THROWS_AS(ricci_recovery(s, CurveProbe{x, zero, 1e-2},
                                   RecoveryMethod::richardson),
                    Error);
    Vector big(3);
    big << 0, 400.0, 0;
    CHECK_THROWS_AS(ricci_recovery(s, CurveProbe{x, big, 1e-2},
                                   RecoveryMethod::richardson),
                    Error); // step reaches the cut locus
}

TEST_CASE("synge remainder slope is quartic on the sphere") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    Vector x(3), V(3);
    x << 1, 0, 0;
    V << 0, 1, 0;
    std::vector<double> steps;
    for (int i = 0; i < 15; ++i)
        steps.push_back(1e-3 * std::pow(100.0, i / 14.0));
    const double slope = synge_remainder_order(s, x, V, steps);
    CHECK(slope > 3.9);
    CHECK(slope < 4.1);

    SmoothGeometry e = SmoothGeometry::euclidean(2);
    Vector a(2), W(2);
    a << 0, 0;
    W << 1, 0;
    CHECK_THROWS_AS(synge_remainder_order(e, a, W, steps),
                    Error); // identically zero remainder
}

TEST_CASE("integral cRic on constant-curvature models") {
    SmoothGeometry s = SmoothGeometry::sphere(3, 2.0);
    auto rng = substream(23, 0);
    Vector x = s.random_point(rng);
    Vector V = s.random_tangent(x, rng);
    Vector y = s.exp_map(x, V, 0.7);
    const double d = s.distance(x, y);
    // Ric(gamma', gamma') = (n-1) d^2 / R^2 all along the geodesic
    CHECK(integral_cric(s, x, y) ==
          doctest::Approx(2.0 * d * d / 4.0).epsilon(1e-12));
    CHECK(integral_cric(s, x, x) == 0.0);

    SmoothGeometry t = SmoothGeometry::flat_torus(2, {1.0, 1.0});
    Vector a(2), b(2);
    a << 0.1, 0.1;
    b << 0.3, 0.2;
    CHECK(integral_cric(t, a, b) == 0.0);
}

TEST_CASE("shrinking sphere satisfies the flow identity") {
    auto rng = substream(29, 0);
    for (int dim : {2, 3}) {
        SmoothGeometry s = SmoothGeometry::sphere(dim, 1.0);
        Vector x = s.random_point(rng);
        Vector y = s.exp_map(x, s.random_tangent(x, rng), 0.9);
        const double extinct = 1.0 / (2.0 * (dim - 1));
        std::vector<double> ts;
        for (int i = 0; i < 5; ++i) ts.push_back(0.8 * extinct * i / 5.0);
        const double resid = ricci_flow_derivative_check(s, x, y, ts);
        CHECK(resid <= 1e-10);
    }
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    Vector x(3), y(3);
    x << 1, 0, 0;
    y << 0, 1, 0;
    CHECK_THROWS_AS(ricci_flow_derivative_check(s, x, y, {0.0, 0.6}),
                    Error); // past extinction
    SmoothGeometry t = SmoothGeometry::flat_torus(1, {1.0});
    Vector a(1), b(1);
    a << 0.1;
    b << 0.4;
    const double flat =
        ricci_flow_derivative_check(t, a, b, {0.0, 0.5, 1.0});
    CHECK(flat <= 1e-14);
}

TEST_CASE("dimensional Ricci family on the Gaussian model") {
    SmoothGeometry ou = SmoothGeometry::gaussian_ou(2);
    Vector x(2), V(2);
    x << 1.0, 0.0;
    V << 0.0, 2.0;
    const double inf_case =
        ric_n_form(ou, x, V, std::numeric_limits<double>::infinity());
    CHECK(inf_case == doctest::Approx(4.0).epsilon(1e-12));

    // N = n: finite only when the weight gradient misses V
    CHECK(ric_n_form(ou, x, V, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
    Vector W(2);
    W << 1.0, 0.0; // drho(W) = 1 != 0
    CHECK(ric_n_form(ou, x, W, 2.0) ==
          -std::numeric_limits<double>::infinity());

    // N < n is degenerate
    CHECK(ric_n_form(ou, x, V, 1.0) ==
          -std::numeric_limits<double>::infinity());

    // finite N > n subtracts drho tensor drho / (N - n)
    const double n4 = ric_n_form(ou, x, W, 4.0);
    CHECK(n4 == doctest::Approx(1.0 - 1.0 / 2.0).epsilon(1e-12));
}

TEST_CASE("samplers produce valid discretizations") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    Discretization fib = discretize(s, Sampler::fibonacci_sphere, 100);
    CHECK(fib.points.size() == 100);
    CHECK(fib.space.n() == 100);
    for (const auto& p : fib.points)
        CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 100; ++i) CHECK(fib.space.dist(i, i) == 0.0);

    SmoothGeometry t = SmoothGeometry::flat_torus(2, {1.0, 1.0});
    Discretization grid = discretize(t, Sampler::uniform_grid, 49);
    CHECK(grid.points.size() == 49);
    CHECK(grid.space.d(0, 1) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK_THROWS_AS(discretize(t, Sampler::uniform_grid, 50),
                    Error); // not a square

    Discretization rnd = discretize(s, Sampler::random, 50, 3);
    Discretization rnd2 = discretize(s, Sampler::random, 50, 3);
    CHECK((rnd.points[10] - rnd2.points[10]).norm() == 0.0);

    CHECK_THROWS_AS(discretize(SmoothGeometry::euclidean(2),
                               Sampler::fibonacci_sphere, 10),
                    Error);
    CHECK(parse_sampler("fibonacci") == Sampler::fibonacci_sphere);
    CHECK(parse_sampler("grid") == Sampler::uniform_grid);
    CHECK_THROWS_AS(parse_sampler("sobol"), Error);
}

TEST_CASE("analytic scan reports cut pairs separately") {
    SmoothGeometry s = SmoothGeometry::sphere(2, 1.0);
    std::vector<Vector> pts;
    Vector a(3), b(3), c(3);
    a << 1, 0, 0;
    b << -1, 0, 0; // antipodal to a
    c << 0, 1, 0;
    pts = {a, b, c};
    CoarseRicciReport r = analytic_ricci_scan(s, pts, {});
    CHECK(r.cut_pairs.size() == 2); // (a,b) and (b,a)
    CHECK(r.pairs.size() == 4);
    for (const auto& p : r.pairs) CHECK(p.ratio >= 1.0 - 1e-12);
}
