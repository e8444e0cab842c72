#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "cricci/generator.hpp"
#include "cricci/space.hpp"

namespace cricci {

// ---------------------------------------------------------------------------
// Carre du champ and its iterate
// ---------------------------------------------------------------------------

/// Gamma(L,u,v) = (L(uv) - (Lu)v - u(Lv)) / 2, the failure of L to satisfy
/// the Leibniz rule, as a pointwise field. Bilinear and symmetric in (u,v).
ScalarField carre_du_champ(const Generator& L, const ScalarField& u,
                           const ScalarField& v);

/// Gamma_2(L,u,v) = (L(Gamma(u,v)) - Gamma(Lu,v) - Gamma(u,Lv)) / 2.
ScalarField gamma2(const Generator& L, const ScalarField& u,
                   const ScalarField& v);

/// Single-point evaluations. These touch only the stencil of z (one level
/// for Gamma, two for Gamma_2), so pair scans stay cheap on sparse operators.
double carre_du_champ_at(const Generator& L, const ScalarField& u,
                         const ScalarField& v, int z);
double gamma2_at(const Generator& L, const ScalarField& u,
                 const ScalarField& v, int x);

// ---------------------------------------------------------------------------
// Coarse Ricci curvature
// ---------------------------------------------------------------------------

/// Ric_L(x,y) = Gamma_2(L, f_{x,y}, f_{x,y})(x) with the test function of
/// test_function(). Not symmetric in (x,y) in general.
double coarse_ricci(const Generator& L, const MetricMeasureSpace& space, int x,
                    int y);

/// On a finite space Gamma_2 is a finite linear-algebraic expression, so the
/// cut locus is empty; this exists for interface parity with the smooth
/// oracles, where the predicate is nontrivial.
bool cut_locus_contains(const MetricMeasureSpace& space, int x, int y);

struct PairValue {
    int x;
    int y;
    double d;
    double ric;
    double ratio; // ric / d^2
};

struct CoarseRicciReport {
    std::vector<PairValue> pairs;
    double K_est = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<int, int>> cut_pairs;
};

struct PairFilter {
    enum class Mode { all, random, maxdist };
    Mode mode = Mode::all;
    int count = 0;         // random: number of ordered pairs to draw
    std::uint64_t seed = 0;
    double max_distance = std::numeric_limits<double>::infinity();
};

/// Scans ordered pairs (x,y), x != y, both admissible for the operator
/// (interior when the generator carries a boundary mask), and reports the
/// per-pair curvature together with K_est = min ric/d^2. Pairs are evaluated
/// in parallel; the min-reduction is associative, so the result does not
/// depend on the worker count.
CoarseRicciReport coarse_ricci_matrix(const Generator& L,
                                      const MetricMeasureSpace& space,
                                      const PairFilter& filter = {},
                                      bool symmetrize = false);

// ---------------------------------------------------------------------------
// Curvature-dimension estimation
// ---------------------------------------------------------------------------

struct CDEstimate {
    int point;
    double N; // infinity() for the dimension-free condition
    double k;
};

/// Best constant k(x) in Gamma_2(f,f)(x) >= (1/N)(Lf)^2(x) + k Gamma(f,f)(x)
/// over all fields f.
///
/// The infimum of [Gamma_2(f,f)(x) - (Lf)^2(x)/N] / Gamma(f,f)(x) is computed
/// as a generalized eigenvalue problem for the quadratic-form pencil
/// (A_x - C_x/N, B_x). Constants are deflated by restricting to the
/// orthogonal complement of the all-ones vector; the remaining null space of
/// B_x (directions that cost nothing in Gamma but still shift Gamma_2) is
/// eliminated by a Schur complement before the reduced pencil is solved, so
/// the eigenvalue equals the stated infimum. Eigendirections of B_x below
/// 1e-12 * trace count as null. Returns -infinity when the infimum is
/// unbounded below (possible for non-Markov operators).
CDEstimate cd_estimate(const Generator& L, int x,
                       double N = std::numeric_limits<double>::infinity());

// ---------------------------------------------------------------------------
// The gradient-vs-distance condition
// ---------------------------------------------------------------------------

struct DistCarreEntry {
    int x;
    int y;
    double d;
    double gamma;
    double ratio; // gamma / d^2; the condition holds for the pair iff >= 1
};

/// Per-pair ratio Gamma(L, f_{x,y}, f_{x,y})(x) / d^2(x,y) over the same
/// admissible ordered pairs as coarse_ricci_matrix.
std::vector<DistCarreEntry> distcarre_check(const Generator& L,
                                            const MetricMeasureSpace& space,
                                            const PairFilter& filter = {});

// ---------------------------------------------------------------------------
// Log-Sobolev audit
// ---------------------------------------------------------------------------

struct LogSobolevTrial {
    double lhs; // integral of f log f dmu
    double rhs; // (1/2K) integral of Gamma(f,f)/f dmu
    bool violated;
};

struct LogSobolevReport {
    double K;
    int trials;
    int violations;
    std::vector<LogSobolevTrial> results;
};

/// Checks int f log f dmu <= (1/2K) int Gamma(f,f)/f dmu on random positive
/// probes with int f dmu = 1. mu must be invariant for L (L^T mu = 0 within
/// 1e-8) and K positive. Each trial derives its own RNG substream from the
/// seed, so results are independent of scheduling.
LogSobolevReport log_sobolev_audit(const Generator& L, const Vector& mu,
                                   double K, int trials, std::uint64_t seed);

/// Single-probe evaluation used by the audit and by tests.
LogSobolevTrial log_sobolev_probe(const Generator& L, const Vector& mu,
                                  double K, const ScalarField& f);

// ---------------------------------------------------------------------------
// Bochner residual against an oracle
// ---------------------------------------------------------------------------

/// Gamma_2(u,u) - [Ric(grad u, grad u) + |Hess u|^2] as a field, where the
/// bracket is supplied per point by a closed-form geometry. Expected to
/// shrink under refinement of the discretization that produced L.
ScalarField bochner_residual(const Generator& L, const ScalarField& u,
                             const ScalarField& oracle_ric_grad,
                             const ScalarField& oracle_hess_sq);

} // namespace cricci
