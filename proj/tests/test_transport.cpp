#include <doctest.h>

#include <cmath>
#include <random>

#include "cricci/builders.hpp"
#include "cricci/rng.hpp"
#include "cricci/transport.hpp"

using namespace cricci;

namespace {

MetricMeasureSpace line_space(const std::vector<double>& coords) {
    const int n = static_cast<int>(coords.size());
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = std::abs(coords[i] - coords[j]);
    MetricMeasureSpace s = build_space(d);
    s.line_coords = coords;
    return s;
}

DiscreteMeasure random_measure(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = unif(rng) + 1e-3;
    w /= w.sum();
    return make_measure(w);
}

} // namespace

TEST_CASE("make_measure validates mass and sign") {
    Vector good(2);
    good << 0.25, 0.75;
    CHECK(make_measure(good).weights(1) == 0.75);
    Vector neg(2);
    neg << -0.1, 1.1;
    CHECK_THROWS_AS(make_measure(neg), Error);
    Vector off(2);
    off << 0.5, 0.6;
    CHECK_THROWS_AS(make_measure(off), Error);
}

TEST_CASE("point-mass transport is the distance") {
    MetricMeasureSpace s = line_space({0.0, 2.0, 5.0});
    Vector a = Vector::Zero(3), b = Vector::Zero(3);
    a(0) = 1;
    b(2) = 1;
    WassersteinResult w1 =
        wasserstein(s, make_measure(a), make_measure(b), 1);
    CHECK(w1.value == doctest::Approx(5.0).epsilon(1e-12));
    WassersteinResult w2 =
        wasserstein(s, make_measure(a), make_measure(b), 2);
    CHECK(w2.value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("identical measures transport for free") {
    MetricMeasureSpace s = line_space({0.0, 1.0, 3.0});
    auto rng = substream(2, 0);
    DiscreteMeasure mu = random_measure(3, rng);
    WassersteinResult w = wasserstein(s, mu, mu, 1);
    CHECK(w.value == 0.0);
    CHECK(w.dual_gap == 0.0);
}

TEST_CASE("LP and quantile walk agree on line instances") {
    auto rng = substream(42, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 49);
        std::uniform_real_distribution<double> unif(0.0, 10.0);
        std::vector<double> coords(n);
        for (double& c : coords) c = unif(rng);
        MetricMeasureSpace s = line_space(coords);
        DiscreteMeasure mu = random_measure(n, rng);
        DiscreteMeasure nu = random_measure(n, rng);
        for (int p : {1, 2}) {
            WassersteinResult lp =
                wasserstein(s, mu, nu, p, TransportMethod::linear_program);
            WassersteinResult ln =
                wasserstein(s, mu, nu, p, TransportMethod::line);
            CHECK(std::abs(lp.value - ln.value) < 1e-10);
            CHECK(lp.dual_gap <= 1e-9);
            // marginals of both plans
            for (const auto& r : {lp, ln}) {
                Vector rows = r.plan.coupling.rowwise().sum();
                Vector cols = r.plan.coupling.colwise().sum();
                CHECK((rows - mu.weights).cwiseAbs().maxCoeff() < 1e-10);
                CHECK((cols - nu.weights).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
        WassersteinResult w1 = wasserstein(s, mu, nu, 1);
        WassersteinResult w2 = wasserstein(s, mu, nu, 2);
        CHECK(w1.value <= w2.value + 1e-12);
    }
}

TEST_CASE("automatic method picks the line path on line spaces") {
    MetricMeasureSpace s = line_space({0.0, 1.0, 2.0});
    auto rng = substream(6, 0);
    DiscreteMeasure mu = random_measure(3, rng);
    DiscreteMeasure nu = random_measure(3, rng);
    WassersteinResult a = wasserstein(s, mu, nu, 1);
    WassersteinResult lp =
        wasserstein(s, mu, nu, 1, TransportMethod::linear_program);
    CHECK(a.dual_gap == 0.0); // the line path carries no LP certificate
    CHECK(std::abs(a.value - lp.value) < 1e-10);

    MetricMeasureSpace general = build_space([] {
        Matrix d(3, 3);
        d << 0, 1, 1, 1, 0, 1, 1, 1, 0;
        return d;
    }());
    CHECK_THROWS_AS(
        wasserstein(general, mu, nu, 1, TransportMethod::line), Error);
}

TEST_CASE("wasserstein is symmetric and triangular on random triples") {
    auto rng = substream(9, 0);
    const int n = 12;
    Matrix d = Matrix::Zero(n, n);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    // random points in the plane keep the triangle inequality
    std::vector<Vector> pts(n, Vector(2));
    for (auto& p : pts) {
        p(0) = unif(rng);
        p(1) = unif(rng);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = (pts[i] - pts[j]).norm();
    MetricMeasureSpace s = build_space(d);
    for (int trial = 0; trial < 5; ++trial) {
        DiscreteMeasure a = random_measure(n, rng);
        DiscreteMeasure b = random_measure(n, rng);
        DiscreteMeasure c = random_measure(n, rng);
        for (int p : {1, 2}) {
            const double ab = wasserstein(s, a, b, p).value;
            const double ba = wasserstein(s, b, a, p).value;
            const double bc = wasserstein(s, b, c, p).value;
            const double ac = wasserstein(s, a, c, p).value;
            CHECK(std::abs(ab - ba) < 1e-9);
            CHECK(ac <= ab + bc + 1e-9);
        }
    }
}

TEST_CASE("entropy closed forms") {
    Vector u(2);
    u << 0.5, 0.5;
    DiscreteMeasure uni = make_measure(u);
    CHECK(entropy(uni, uni) == 0.0);

    Vector point(2);
    point << 1.0, 0.0;
    CHECK(entropy(make_measure(point), uni) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(entropy(uni, make_measure(point)) ==
          std::numeric_limits<double>::infinity());
    CHECK(entropy(make_measure(point), make_measure(point)) == 0.0);

    auto rng = substream(11, 0);
    for (int trial = 0; trial < 10; ++trial) {
        DiscreteMeasure a = random_measure(6, rng);
        DiscreteMeasure b = random_measure(6, rng);
        CHECK(entropy(a, b) >= 0.0);
    }
}

TEST_CASE("ollivier kappa on the pinned kernels") {
    Matrix d2(2, 2);
    d2 << 0, 1, 1, 0;
    MetricMeasureSpace two = build_space(d2);

    Matrix half(2, 2);
    half << 0.5, 0.5, 0.5, 0.5;
    CHECK(ollivier_kappa(two, half, 0, 1) ==
          doctest::Approx(1.0).epsilon(1e-12));

    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    CHECK(ollivier_kappa(two, swap, 0, 1) ==
          doctest::Approx(0.0).epsilon(1e-12));

    GraphOperator k3 = graph_generator(
        {{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
    Matrix P = lazy_step_kernel(k3.L);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            if (x != y)
                CHECK(ollivier_kappa(k3.space, P, x, y) ==
                      doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(ollivier_kappa(two, half, 0, 0), Error);
    Matrix notstoch(2, 2);
    notstoch << 0.7, 0.7, 0.5, 0.5;
    CHECK_THROWS_AS(ollivier_kappa(two, notstoch, 0, 1), Error);
}

TEST_CASE("kappa never exceeds one") {
    auto rng = substream(15, 0);
    const int n = 6;
    Matrix d = Matrix::Zero(n, n);
    std::uniform_real_distribution<double> unif(0.5, 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            d(i, j) = unif(rng);
            d(j, i) = d(i, j);
        }
    MetricMeasureSpace s = build_space(d);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix P(n, n);
        for (int i = 0; i < n; ++i) {
            Vector row(n);
            for (int j = 0; j < n; ++j)
                row(j) = std::uniform_real_distribution<double>(0, 1)(rng);
            P.row(i) = row / row.sum();
        }
        const int x = static_cast<int>(rng() % n);
        int y = static_cast<int>(rng() % n);
        if (y == x) y = (y + 1) % n;
        CHECK(ollivier_kappa(s, P, x, y) <= 1.0 + 1e-12);
    }
}

TEST_CASE("lazy kernel is the unit-rate jump chain") {
    GraphOperator k3 = graph_generator(
        {{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
    Matrix P = lazy_step_kernel(k3.L);
    CHECK(P(0, 0) == doctest::Approx(0.0));
    CHECK(P(0, 1) == doctest::Approx(0.5));
    Matrix zero = Matrix::Zero(2, 2);
    Generator none = make_generator(zero, GeneratorKind::markov);
    Matrix I = lazy_step_kernel(none);
    CHECK(I(0, 0) == 1.0);
    CHECK(I(0, 1) == 0.0);
}

TEST_CASE("two-point contraction rate is two") {
    GraphOperator g = graph_generator({{"a", "b", 1.0}});
    std::vector<double> ts{0.2, 0.5, 0.8, 1.1, 1.4};
    DecayFit fit = contraction_rate(g.L, g.space, 0, 1, ts, 1);
    CHECK(fit.rate == doctest::Approx(2.0).epsilon(1e-10));
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(fit.distances[i] ==
              doctest::Approx(std::exp(-2.0 * ts[i])).epsilon(1e-10));

    CHECK_THROWS_AS(contraction_rate(g.L, g.space, 0, 1, {0.1, 0.2}, 1),
                    Error); // too few grid points
    CHECK_THROWS_AS(contraction_rate(g.L, g.space, 0, 1, {0.2, 0.1, 0.3}, 1),
                    Error); // not increasing
    CHECK_THROWS_AS(
        contraction_rate(g.L, g.space, 0, 1, {20.0, 25.0, 30.0}, 1),
        Error); // decayed below the fit floor
}

TEST_CASE("cycle walk shows no contraction at short times") {
    std::vector<Edge> edges;
    const int m = 40;
    for (int i = 0; i < m; ++i)
        edges.push_back(
            {std::to_string(i), std::to_string((i + 1) % m), 1.0});
    GraphOperator g = graph_generator(edges);
    std::vector<double> ts{0.2, 0.4, 0.6, 0.8, 1.0};
    DecayFit fit = contraction_rate(g.L, g.space, 0, 1, ts, 1);
    CHECK(std::abs(fit.rate) <= 0.05);
}
