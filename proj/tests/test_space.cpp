#include <doctest.h>

#include "cricci/space.hpp"

using namespace cricci;

namespace {

Matrix two_point_dist() {
    Matrix d(2, 2);
    d << 0, 1, 1, 0;
    return d;
}

} // namespace

TEST_CASE("build_space validates shape and entries") {
    CHECK_THROWS_AS(build_space(Matrix::Zero(2, 3)), Error);

    Matrix neg = two_point_dist();
    neg(0, 1) = -1;
    neg(1, 0) = -1;
    CHECK_THROWS_AS(build_space(neg), Error);

    Matrix diag = two_point_dist();
    diag(0, 0) = 0.5;
    CHECK_THROWS_AS(build_space(diag), Error);

    Matrix asym = two_point_dist();
    asym(1, 0) = 2.0;
    CHECK_THROWS_AS(build_space(asym), Error);
    MetricMeasureSpace s = build_space(asym, std::nullopt, false);
    CHECK(s.symmetric == false);
    CHECK(s.d(1, 0) == 2.0);
}

TEST_CASE("build_space defaults and measure checks") {
    MetricMeasureSpace s = build_space(two_point_dist());
    CHECK(s.n() == 2);
    CHECK(s.measure(0) == doctest::Approx(0.5));
    CHECK(s.labels[1] == "1");
    CHECK_FALSE(s.is_line());

    Vector bad(3);
    bad << 0.5, 0.25, 0.25;
    CHECK_THROWS_AS(build_space(two_point_dist(), bad), Error);

    Vector unnorm(2);
    unnorm << 2.0, 6.0;
    MetricMeasureSpace t = build_space(two_point_dist(), unnorm);
    CHECK(t.measure(1) == doctest::Approx(0.75));
}

TEST_CASE("test function takes pinned values at the endpoints") {
    // f_{x,y}(x) = 0 and f_{x,y}(y) = d^2(x,y) on symmetric spaces
    Matrix d(3, 3);
    d << 0, 2, 3, 2, 0, 4, 3, 4, 0;
    MetricMeasureSpace s = build_space(d);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            if (x == y) continue;
            ScalarField f = test_function(s, x, y);
            CHECK(f(x) == doctest::Approx(0.0));
            CHECK(f(y) == doctest::Approx(s.d(x, y) * s.d(x, y)));
            for (int z = 0; z < 3; ++z)
                CHECK(f(z) == doctest::Approx(test_function_at(s, x, y, z)));
        }
}

TEST_CASE("two-point test function is (0, 1)") {
    MetricMeasureSpace s = build_space(two_point_dist());
    ScalarField f = test_function(s, 0, 1);
    CHECK(f(0) == 0.0);
    CHECK(f(1) == 1.0);
}
