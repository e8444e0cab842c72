#pragma once

#include <stdexcept>
#include <string>

namespace cricci {

// Every failure the library reports, split into input problems (bad files,
// malformed matrices, contract violations at the API boundary) and numeric
// problems (infeasible or undefined computations on valid inputs). The CLI
// maps the two kinds to exit codes 2 and 3.
enum class ErrorCode {
    // input
    NonSquareMatrix,
    NegativeDistance,
    NonzeroDiagonal,
    AsymmetryWithoutFlag,
    DimensionMismatch,
    NonpositiveWeight,
    NonpositiveBandwidth,
    DuplicatePoints,
    NonuniformGrid,
    NotAGenerator,
    MeasureMismatch,
    SamePoint,
    UnsupportedSampler,
    NonpositiveK,
    InvalidInput,
    // numeric / feasibility
    CutLocusPair,
    NoAdmissiblePairs,
    DegenerateGamma,
    NonInvariantMeasure,
    ReducibleChain,
    DegenerateDecay,
    StepTooLarge,
    RemainderBelowNoiseFloor,
    FlowExtinct,
    OracleRequired,
    NumericFailure,
};

constexpr bool is_input_error(ErrorCode c) {
    return c < ErrorCode::CutLocusPair;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }
    bool input_error() const { return is_input_error(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace cricci
