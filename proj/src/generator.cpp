#include "cricci/generator.hpp"

#include <cmath>

namespace cricci {

namespace {
constexpr double kRowSumTol = 1e-10;
constexpr double kMetzlerTol = 1e-12;
}

Vector row_sum_defect(const SparseMatrix& matrix) {
    Vector s = Vector::Zero(matrix.rows());
    for (int i = 0; i < matrix.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it)
            s(it.row()) += it.value();
    return s;
}

Generator make_generator(const SparseMatrix& matrix, GeneratorKind kind) {
    if (matrix.rows() != matrix.cols())
        fail(ErrorCode::NonSquareMatrix, "generator matrix not square");
    const Vector defect = row_sum_defect(matrix);
    if (defect.size() > 0 && defect.cwiseAbs().maxCoeff() > kRowSumTol)
        fail(ErrorCode::NotAGenerator,
             "rows must sum to zero (max defect " +
                 std::to_string(defect.cwiseAbs().maxCoeff()) + ")");
    if (kind == GeneratorKind::markov) {
        for (int i = 0; i < matrix.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(matrix, i); it; ++it)
                if (it.row() != it.col() && it.value() < -kMetzlerTol)
                    fail(ErrorCode::NotAGenerator,
                         "markov generator has negative off-diagonal entry");
    }
    Generator g;
    g.matrix = matrix;
    g.matrix.makeCompressed();
    g.kind = kind;
    return g;
}

Generator make_generator(const Matrix& dense, GeneratorKind kind) {
    return make_generator(SparseMatrix(dense.sparseView()), kind);
}

} // namespace cricci
