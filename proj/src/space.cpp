#include "cricci/space.hpp"

#include <cmath>

namespace cricci {

namespace {
constexpr double kSymmetryTol = 1e-12;
}

MetricMeasureSpace build_space(const Matrix& dist, std::optional<Vector> measure,
                               bool symmetric, std::vector<std::string> labels) {
    const auto rows = dist.rows();
    if (rows != dist.cols())
        fail(ErrorCode::NonSquareMatrix,
             "distance matrix is " + std::to_string(rows) + "x" +
                 std::to_string(dist.cols()));
    const int n = static_cast<int>(rows);
    if (n < 1) fail(ErrorCode::InvalidInput, "empty distance matrix");

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = dist(i, j);
            if (!std::isfinite(v))
                fail(ErrorCode::InvalidInput, "non-finite distance entry");
            if (v < 0.0)
                fail(ErrorCode::NegativeDistance,
                     "dist(" + std::to_string(i) + "," + std::to_string(j) +
                         ") = " + std::to_string(v));
        }
        if (dist(i, i) != 0.0)
            fail(ErrorCode::NonzeroDiagonal,
                 "dist(" + std::to_string(i) + "," + std::to_string(i) + ") != 0");
    }
    for (int i = 0; i < n && symmetric; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(dist(i, j) - dist(j, i)) > kSymmetryTol)
                fail(ErrorCode::AsymmetryWithoutFlag,
                     "symmetric flag set but dist(" + std::to_string(i) + "," +
                         std::to_string(j) + ") != dist(j,i)");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && dist(i, j) == 0.0)
                fail(ErrorCode::InvalidInput,
                     "zero distance between distinct points " + std::to_string(i) +
                         "," + std::to_string(j));

    MetricMeasureSpace space;
    space.dist = dist;
    space.symmetric = symmetric;
    if (measure) {
        if (measure->size() != n)
            fail(ErrorCode::DimensionMismatch, "measure length != point count");
        for (int i = 0; i < n; ++i)
            if ((*measure)(i) <= 0.0)
                fail(ErrorCode::InvalidInput, "measure entries must be positive");
        const double total = measure->sum();
        if (!std::isfinite(total) || total <= 0.0)
            fail(ErrorCode::InvalidInput, "measure has no finite positive total");
        space.measure = *measure / total;
    } else {
        space.measure = Vector::Constant(n, 1.0 / n);
    }
    if (!labels.empty()) {
        if (static_cast<int>(labels.size()) != n)
            fail(ErrorCode::DimensionMismatch, "label count != point count");
        space.labels = std::move(labels);
    } else {
        space.labels.reserve(n);
        for (int i = 0; i < n; ++i) space.labels.push_back(std::to_string(i));
    }
    return space;
}

double test_function_at(const MetricMeasureSpace& space, int x, int y, int z) {
    const double dxy = space.dist(x, y);
    const double dyz = space.dist(y, z);
    const double dzx = space.dist(z, x);
    return 0.5 * (dxy * dxy - dyz * dyz + dzx * dzx);
}

ScalarField test_function(const MetricMeasureSpace& space, int x, int y) {
    const int n = space.n();
    if (x < 0 || x >= n || y < 0 || y >= n)
        fail(ErrorCode::InvalidInput, "point index out of range");
    ScalarField f(n);
    for (int z = 0; z < n; ++z) f(z) = test_function_at(space, x, y, z);
    return f;
}

} // namespace cricci
