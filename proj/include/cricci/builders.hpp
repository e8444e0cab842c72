#pragma once

#include <string>
#include <vector>

#include "cricci/generator.hpp"
#include "cricci/space.hpp"

namespace cricci {

struct Edge {
    std::string u;
    std::string v;
    double w = 1.0;
};

enum class DistanceMode { unit_hop, weighted };

struct GraphOperator {
    Generator L;
    MetricMeasureSpace space;
    // Nonempty when the input was disconnected and only the largest
    // component was kept.
    std::vector<std::string> warnings;
};

// Graph Laplacian Lf(x) = sum_{y~x} w(x,y) (f(y) - f(x)) together with the
// shortest-path metric (hop counts, or edge weights as lengths).
GraphOperator graph_generator(const std::vector<Edge>& edges,
                              DistanceMode mode = DistanceMode::unit_hop);

enum class KernelNormalization { laplace_beltrami, fokker_planck };

struct KernelConfig {
    double bandwidth = 0.0; // t, units length^2
    KernelNormalization normalization = KernelNormalization::laplace_beltrami;
    double cutoff = 0.0; // drop kernel entries beyond this radius; <= 0 picks
                         // the default 6*sqrt(bandwidth)
};

struct KernelOperator {
    Generator L;
    MetricMeasureSpace space; // chordal (Euclidean) distances
};

// Kernel Laplacian L_t f(x) = (1/t) (sum_y k(x,y) f(y) / sum_y k(x,y) - f(x))
// with k(x,y) = exp(-|x-y|^2 / 4t). fokker-planck mode first divides k by the
// density estimates q(x) q(y).
KernelOperator pointcloud_generator(const std::vector<Vector>& points,
                                    const KernelConfig& config);

struct UniformGrid {
    std::vector<double> origin;  // per-axis first coordinate
    std::vector<double> spacing; // per-axis step, uniform within an axis
    std::vector<int> shape;      // per-axis point count, >= 3

    int dim() const { return static_cast<int>(shape.size()); }
    int size() const;
    Vector coordinate(int i) const; // row-major flattening
};

UniformGrid make_grid(std::vector<double> origin, std::vector<double> spacing,
                      std::vector<int> shape);

// 1D grid from explicit coordinates; consecutive gaps must agree.
UniformGrid grid_from_line(const std::vector<double>& coords);

struct WeightField {
    ScalarField rho;                // size 0 means rho == 0
    std::vector<Vector> grad_rho;   // optional closed-form gradient per point
};

// Weighted Laplacian L u = Delta u - <grad rho, grad u> with central
// differences inside and one-sided stencils on the boundary. Boundary bands
// of width 2 are flagged non-interior.
Generator weighted_grid_generator(const UniformGrid& grid,
                                  const WeightField& weight);

// Euclidean distances between grid nodes, uniform measure; 1D grids carry
// line coordinates for the transport fast path.
MetricMeasureSpace grid_space(const UniformGrid& grid);

// P_t = exp(tL), rows renormalized to sum 1 after clamping negative roundoff.
Matrix semigroup_matrix(const Generator& L, double t);

struct StationaryMeasure {
    Vector mu;
    bool detailed_balance;
    double residual; // max |(L^T mu)_i| for the solved chain
};

// Stationary vector of the jump chain described by L. Rows with negative
// off-diagonal entries (grid boundary closures) are not rate rows; they
// are replaced by their reversed incoming edges before solving, which
// leaves mass ratios between interior nodes unchanged. Such rows must be
// flagged non-interior.
StationaryMeasure invariant_measure(const Generator& L);

} // namespace cricci
