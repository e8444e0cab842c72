#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "cricci/errors.hpp"
#include "cricci/space.hpp"

namespace cricci {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class GeneratorKind { markov, grid, kernel, custom };

/// The operator L of all curvature computations: an n x n matrix acting on
/// scalar fields by matrix-vector product. Stored sparse so that pointwise
/// Gamma_2 evaluations only touch the local stencil.
struct Generator {
    SparseMatrix matrix;
    GeneratorKind kind = GeneratorKind::custom;

    // Rows whose stencil does not reach a boundary band. Empty means every
    // point is admissible for curvature scans (graphs, kernels, custom).
    std::vector<std::uint8_t> interior;

    int n() const { return static_cast<int>(matrix.rows()); }
    bool is_interior(int i) const {
        return interior.empty() || interior[static_cast<std::size_t>(i)] != 0;
    }

    ScalarField apply(const ScalarField& f) const { return matrix * f; }
};

/// Wraps a matrix as a generator after validating the invariants for its
/// kind: rows sum to zero (all kinds, 1e-10), nonnegative off-diagonal
/// entries (markov only).
Generator make_generator(const SparseMatrix& matrix, GeneratorKind kind);
Generator make_generator(const Matrix& dense, GeneratorKind kind);

/// Row sums as a vector; the validation tolerance applies to its sup norm.
Vector row_sum_defect(const SparseMatrix& matrix);

} // namespace cricci
