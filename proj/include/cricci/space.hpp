#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "cricci/errors.hpp"

namespace cricci {

using ScalarField = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A finite metric measure space: point labels, a dense distance matrix
/// (possibly asymmetric), and a reference probability measure.
struct MetricMeasureSpace {
    std::vector<std::string> labels;
    Matrix dist;
    Vector measure;
    bool symmetric = true;

    // Set by 1D builders when the points sit on a line and dist(i,j) is the
    // coordinate gap; enables the order-statistics transport fast path.
    std::vector<double> line_coords;

    int n() const { return static_cast<int>(dist.rows()); }
    double d(int i, int j) const { return dist(i, j); }
    bool is_line() const { return !line_coords.empty(); }
};

struct PointPair {
    int x;
    int y;
    double d;
};

/// Validates and assembles a space. Measure defaults to uniform; labels
/// default to "0", "1", ... The symmetric flag is a promise that is checked
/// (within 1e-12) rather than an instruction to symmetrize.
MetricMeasureSpace build_space(const Matrix& dist,
                               std::optional<Vector> measure = std::nullopt,
                               bool symmetric = true,
                               std::vector<std::string> labels = {});

/// The distance-squared test function
///   f_{x,y}(z) = (d^2(x,y) - d^2(y,z) + d^2(z,x)) / 2
/// evaluated at every point of the space. In Euclidean space this is affine
/// with gradient y - x; all curvature quantities here are built from it.
ScalarField test_function(const MetricMeasureSpace& space, int x, int y);

/// Single-point evaluation of the same function.
double test_function_at(const MetricMeasureSpace& space, int x, int y, int z);

} // namespace cricci
