#include "cricci/gamma.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "cricci/parallel.hpp"
#include "cricci/rng.hpp"

namespace cricci {

namespace {

void check_field(const Generator& L, const ScalarField& u, const char* name) {
    if (u.size() != L.n())
        fail(ErrorCode::DimensionMismatch,
             std::string(name) + " has length " + std::to_string(u.size()) +
                 ", operator has " + std::to_string(L.n()) + " points");
}

} // namespace

ScalarField carre_du_champ(const Generator& L, const ScalarField& u,
                           const ScalarField& v) {
    check_field(L, u, "u");
    check_field(L, v, "v");
    const ScalarField uv = u.cwiseProduct(v);
    return 0.5 * (L.matrix * uv - (L.matrix * u).cwiseProduct(v) -
                  u.cwiseProduct(L.matrix * v));
}

ScalarField gamma2(const Generator& L, const ScalarField& u,
                   const ScalarField& v) {
    const ScalarField g = carre_du_champ(L, u, v);
    const ScalarField lu = L.matrix * u;
    const ScalarField lv = L.matrix * v;
    return 0.5 * (L.matrix * g - carre_du_champ(L, lu, v) -
                  carre_du_champ(L, u, lv));
}

double carre_du_champ_at(const Generator& L, const ScalarField& u,
                         const ScalarField& v, int z) {
    check_field(L, u, "u");
    check_field(L, v, "v");
    double acc_uv = 0, acc_u = 0, acc_v = 0;
    for (SparseMatrix::InnerIterator it(L.matrix, z); it; ++it) {
        const int w = static_cast<int>(it.col());
        acc_uv += it.value() * u(w) * v(w);
        acc_u += it.value() * u(w);
        acc_v += it.value() * v(w);
    }
    return 0.5 * (acc_uv - v(z) * acc_u - u(z) * acc_v);
}

double gamma2_at(const Generator& L, const ScalarField& u, const ScalarField& v,
                 int x) {
    check_field(L, u, "u");
    check_field(L, v, "v");
    // One level of stencil around x carries everything: Gamma at the
    // neighbors, Lu and Lv at the neighbors, and the row of x itself.
    double lgam = 0, acc_ulv = 0, acc_lu_v = 0, acc_lu = 0, acc_lv = 0;
    const ScalarField lu = L.matrix * u;
    const ScalarField lv = L.matrix * v;
    for (SparseMatrix::InnerIterator it(L.matrix, x); it; ++it) {
        const int w = static_cast<int>(it.col());
        lgam += it.value() * carre_du_champ_at(L, u, v, w);
        acc_ulv += it.value() * u(w) * lv(w);
        acc_lu_v += it.value() * lu(w) * v(w);
        acc_lu += it.value() * lu(w);
        acc_lv += it.value() * lv(w);
    }
    const double gamma_lu_v = 0.5 * (acc_lu_v - v(x) * acc_lu - lu(x) * lv(x));
    const double gamma_u_lv = 0.5 * (acc_ulv - lv(x) * lu(x) - u(x) * acc_lv);
    return 0.5 * (lgam - gamma_lu_v - gamma_u_lv);
}

// ---------------------------------------------------------------------------
// Coarse Ricci: pointwise evaluation with lazily materialized test function
// ---------------------------------------------------------------------------

namespace {

// Scratch for repeated pair evaluations. The test function, Lf and Gamma(f,f)
// are only ever needed on the two-level stencil of x; entries are validated
// by an epoch stamp so nothing is cleared between pairs.
struct RicScratch {
    std::vector<double> f, lf, gam;
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
    std::vector<int> s1;

    void prepare(int n) {
        if (static_cast<int>(f.size()) != n) {
            f.assign(n, 0.0);
            lf.assign(n, 0.0);
            gam.assign(n, 0.0);
            stamp.assign(n, 0);
            epoch = 0;
        }
        if (++epoch == 0) { // stamp wraparound
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
        s1.clear();
    }

    double fval(const MetricMeasureSpace& sp, int x, int y, int z) {
        if (stamp[z] != epoch) {
            f[z] = test_function_at(sp, x, y, z);
            stamp[z] = epoch;
        }
        return f[z];
    }
};

double gamma_f_at(RicScratch& s, const Generator& L,
                  const MetricMeasureSpace& sp, int x, int y, int z) {
    double acc_ff = 0, acc_f = 0;
    for (SparseMatrix::InnerIterator it(L.matrix, z); it; ++it) {
        const double fw = s.fval(sp, x, y, static_cast<int>(it.col()));
        acc_ff += it.value() * fw * fw;
        acc_f += it.value() * fw;
    }
    s.lf[z] = acc_f;
    return 0.5 * acc_ff - s.fval(sp, x, y, z) * acc_f;
}

double coarse_ricci_impl(RicScratch& s, const Generator& L,
                         const MetricMeasureSpace& sp, int x, int y) {
    s.prepare(L.n());
    s.s1.push_back(x);
    for (SparseMatrix::InnerIterator it(L.matrix, x); it; ++it)
        if (it.col() != x) s.s1.push_back(static_cast<int>(it.col()));
    for (int z : s.s1) s.gam[z] = gamma_f_at(s, L, sp, x, y, z);

    double lgam = 0, acc_flf = 0, acc_lf = 0;
    for (SparseMatrix::InnerIterator it(L.matrix, x); it; ++it) {
        const int w = static_cast<int>(it.col());
        lgam += it.value() * s.gam[w];
        acc_flf += it.value() * s.f[w] * s.lf[w];
        acc_lf += it.value() * s.lf[w];
    }
    const double gamma_f_lf =
        0.5 * (acc_flf - s.lf[x] * s.lf[x] - s.f[x] * acc_lf);
    return 0.5 * lgam - gamma_f_lf;
}

double distcarre_impl(RicScratch& s, const Generator& L,
                      const MetricMeasureSpace& sp, int x, int y) {
    s.prepare(L.n());
    return gamma_f_at(s, L, sp, x, y, x);
}

void check_pair(const Generator& L, const MetricMeasureSpace& sp, int x,
                int y) {
    if (L.n() != sp.n())
        fail(ErrorCode::DimensionMismatch, "operator and space sizes differ");
    if (x < 0 || x >= sp.n() || y < 0 || y >= sp.n())
        fail(ErrorCode::InvalidInput, "point index out of range");
    if (x == y) fail(ErrorCode::SamePoint, "coarse Ricci needs x != y");
}

} // namespace

double coarse_ricci(const Generator& L, const MetricMeasureSpace& space, int x,
                    int y) {
    check_pair(L, space, x, y);
    RicScratch scratch;
    return coarse_ricci_impl(scratch, L, space, x, y);
}

bool cut_locus_contains(const MetricMeasureSpace&, int, int) { return false; }

namespace {

std::vector<std::pair<int, int>> enumerate_pairs(
    const Generator& L, const MetricMeasureSpace& space,
    const PairFilter& filter) {
    std::vector<int> idx;
    for (int i = 0; i < space.n(); ++i)
        if (L.is_interior(i)) idx.push_back(i);

    std::vector<std::pair<int, int>> pairs;
    switch (filter.mode) {
    case PairFilter::Mode::all:
        for (int a : idx)
            for (int b : idx)
                if (a != b) pairs.emplace_back(a, b);
        break;
    case PairFilter::Mode::maxdist:
        for (int a : idx)
            for (int b : idx)
                if (a != b && space.d(a, b) <= filter.max_distance)
                    pairs.emplace_back(a, b);
        break;
    case PairFilter::Mode::random: {
        if (idx.size() < 2) break;
        auto rng = substream(filter.seed, 0);
        std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
        while (static_cast<int>(pairs.size()) < filter.count) {
            const int a = idx[pick(rng)];
            const int b = idx[pick(rng)];
            if (a != b) pairs.emplace_back(a, b);
        }
        break;
    }
    }
    return pairs;
}

} // namespace

CoarseRicciReport coarse_ricci_matrix(const Generator& L,
                                      const MetricMeasureSpace& space,
                                      const PairFilter& filter,
                                      bool symmetrize) {
    if (L.n() != space.n())
        fail(ErrorCode::DimensionMismatch, "operator and space sizes differ");
    const auto pairs = enumerate_pairs(L, space, filter);
    if (pairs.empty())
        fail(ErrorCode::NoAdmissiblePairs, "no admissible pairs to scan");

    CoarseRicciReport report;
    report.pairs.resize(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        thread_local RicScratch scratch;
        const auto [x, y] = pairs[i];
        const double d = space.d(x, y);
        double ric = coarse_ricci_impl(scratch, L, space, x, y);
        if (symmetrize)
            ric = 0.5 * (ric + coarse_ricci_impl(scratch, L, space, y, x));
        report.pairs[i] = PairValue{x, y, d, ric, ric / (d * d)};
    });
    double kmin = std::numeric_limits<double>::infinity();
    for (const auto& p : report.pairs) kmin = std::min(kmin, p.ratio);
    report.K_est = kmin;
    return report;
}

std::vector<DistCarreEntry> distcarre_check(const Generator& L,
                                            const MetricMeasureSpace& space,
                                            const PairFilter& filter) {
    if (L.n() != space.n())
        fail(ErrorCode::DimensionMismatch, "operator and space sizes differ");
    const auto pairs = enumerate_pairs(L, space, filter);
    if (pairs.empty())
        fail(ErrorCode::NoAdmissiblePairs, "no admissible pairs to scan");
    std::vector<DistCarreEntry> out(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        thread_local RicScratch scratch;
        const auto [x, y] = pairs[i];
        const double d = space.d(x, y);
        const double g = distcarre_impl(scratch, L, space, x, y);
        out[i] = DistCarreEntry{x, y, d, g, g / (d * d)};
    });
    return out;
}

// ---------------------------------------------------------------------------
// Curvature-dimension estimate
// ---------------------------------------------------------------------------

namespace {

// Quadratic form of Gamma(.,.)(z): G(z) = diag(r_z)/2 - (e_z r_z^T + r_z e_z^T)/2
// with r_z the z-th row of L. Accumulated scaled into a dense target.
void add_gamma_form(Matrix& target, const SparseMatrix& L, int z,
                    double scale) {
    for (SparseMatrix::InnerIterator it(L, z); it; ++it) {
        const int w = static_cast<int>(it.col());
        const double v = scale * it.value();
        target(w, w) += 0.5 * v;
        target(z, w) -= 0.5 * v;
        target(w, z) -= 0.5 * v;
    }
}

// Orthonormal basis of the complement of the all-ones vector (Helmert).
Matrix ones_complement_basis(int n) {
    Matrix Q = Matrix::Zero(n, n - 1);
    for (int k = 0; k < n - 1; ++k) {
        const double norm = std::sqrt(static_cast<double>(k + 1) * (k + 2));
        for (int i = 0; i <= k; ++i) Q(i, k) = 1.0 / norm;
        Q(k + 1, k) = -(k + 1.0) / norm;
    }
    return Q;
}

} // namespace

CDEstimate cd_estimate(const Generator& L, int x, double N) {
    const int n = L.n();
    if (x < 0 || x >= n) fail(ErrorCode::InvalidInput, "point index out of range");
    if (!(N >= 1.0))
        fail(ErrorCode::InvalidInput, "dimension parameter N must be >= 1");
    if (n < 2) fail(ErrorCode::DegenerateGamma, "space has a single point");
    const double inf = std::numeric_limits<double>::infinity();

    const Matrix Ld = Matrix(L.matrix);
    const Vector ell = Ld.row(x).transpose();

    // B = Gamma form at x; A = Gamma_2 form at x.
    Matrix B = Matrix::Zero(n, n);
    add_gamma_form(B, L.matrix, x, 1.0);

    Matrix A = Matrix::Zero(n, n);
    for (SparseMatrix::InnerIterator it(L.matrix, x); it; ++it)
        add_gamma_form(A, L.matrix, static_cast<int>(it.col()),
                       0.5 * it.value());
    // subtract sym(G(x) L): G(x) L = diag(ell) L / 2 - e_x (L^T ell)^T / 2
    //                               - ell (row x of L) / 2
    Matrix T = 0.5 * ell.asDiagonal() * Ld;
    T.row(x) -= 0.5 * (Ld.transpose() * ell).transpose();
    T.noalias() -= 0.5 * ell * Ld.row(x);
    A -= 0.5 * (T + T.transpose());

    Matrix M = A;
    if (std::isfinite(N)) M.noalias() -= (1.0 / N) * (ell * ell.transpose());

    // Deflate constants, then split the complement by the spectrum of B.
    const Matrix Q = ones_complement_basis(n);
    const Matrix Bw = Q.transpose() * B * Q;
    const Matrix Mw = Q.transpose() * M * Q;

    Eigen::SelfAdjointEigenSolver<Matrix> eb(Bw);
    const Vector lam = eb.eigenvalues();
    const Matrix V = eb.eigenvectors();
    const double btrace = Bw.trace();
    const double bthr = 1e-12 * std::abs(btrace);
    const double bscale = lam.cwiseAbs().maxCoeff();
    if (lam.minCoeff() < -1e-10 * std::max(bscale, 1e-300))
        return CDEstimate{x, N, -inf};

    std::vector<int> pos, nul;
    for (int i = 0; i < lam.size(); ++i)
        (lam(i) > bthr ? pos : nul).push_back(i);
    if (pos.empty())
        fail(ErrorCode::DegenerateGamma,
             "Gamma(.,.)(x) vanishes on all nonconstant fields");

    Matrix R(n - 1, static_cast<int>(pos.size()));
    Vector lam_pos(static_cast<int>(pos.size()));
    for (std::size_t i = 0; i < pos.size(); ++i) {
        R.col(static_cast<int>(i)) = V.col(pos[i]);
        lam_pos(static_cast<int>(i)) = lam(pos[i]);
    }

    Matrix Meff = R.transpose() * Mw * R;
    if (!nul.empty()) {
        Matrix K(n - 1, static_cast<int>(nul.size()));
        for (std::size_t i = 0; i < nul.size(); ++i)
            K.col(static_cast<int>(i)) = V.col(nul[i]);
        const Matrix Mrk = R.transpose() * Mw * K;
        const Matrix Mkk = K.transpose() * Mw * K;

        Eigen::SelfAdjointEigenSolver<Matrix> ek(Mkk);
        const Vector sig = ek.eigenvalues();
        const Matrix U = ek.eigenvectors();
        const double mscale =
            std::max({Mw.cwiseAbs().maxCoeff(), sig.cwiseAbs().maxCoeff(), 1e-300});
        const double sthr = 1e-11 * mscale;
        if (sig.minCoeff() < -sthr) return CDEstimate{x, N, -inf};

        // Null directions of M_KK that couple to the range make the infimum
        // run away linearly; positive ones are eliminated by Schur.
        for (int i = 0; i < sig.size(); ++i) {
            const Vector w = Mrk * U.col(i);
            if (sig(i) <= sthr) {
                if (w.cwiseAbs().maxCoeff() > 1e-8 * mscale)
                    return CDEstimate{x, N, -inf};
            } else {
                Meff.noalias() -= (w * w.transpose()) / sig(i);
            }
        }
    }

    const Vector w = lam_pos.cwiseSqrt().cwiseInverse();
    const Matrix pencil = w.asDiagonal() * Meff * w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> em(pencil);
    return CDEstimate{x, N, em.eigenvalues().minCoeff()};
}

// ---------------------------------------------------------------------------
// Log-Sobolev audit
// ---------------------------------------------------------------------------

LogSobolevTrial log_sobolev_probe(const Generator& L, const Vector& mu,
                                  double K, const ScalarField& f) {
    check_field(L, f, "f");
    const ScalarField g = carre_du_champ(L, f, f);
    double lhs = 0, dirichlet = 0;
    for (int i = 0; i < f.size(); ++i) {
        lhs += mu(i) * f(i) * std::log(f(i));
        dirichlet += mu(i) * g(i) / f(i);
    }
    const double rhs = dirichlet / (2.0 * K);
    const bool violated = lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs));
    return LogSobolevTrial{lhs, rhs, violated};
}

LogSobolevReport log_sobolev_audit(const Generator& L, const Vector& mu,
                                   double K, int trials, std::uint64_t seed) {
    if (!(K > 0.0)) fail(ErrorCode::NonpositiveK, "K must be positive");
    if (mu.size() != L.n())
        fail(ErrorCode::DimensionMismatch, "measure length != operator size");
    const Vector residual = L.matrix.transpose() * mu;
    if (residual.cwiseAbs().maxCoeff() > 1e-8)
        fail(ErrorCode::NonInvariantMeasure,
             "measure is not invariant for L (|L^T mu| = " +
                 std::to_string(residual.cwiseAbs().maxCoeff()) + ")");

    LogSobolevReport report;
    report.K = K;
    report.trials = trials;
    report.violations = 0;
    report.results.resize(trials);
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        auto rng = substream(seed, t);
        std::normal_distribution<double> gauss(0.0, 1.0);
        ScalarField f(L.n());
        for (int i = 0; i < L.n(); ++i) f(i) = std::exp(gauss(rng));
        f /= mu.dot(f);
        report.results[t] = log_sobolev_probe(L, mu, K, f);
    });
    for (const auto& r : report.results)
        if (r.violated) ++report.violations;
    return report;
}

ScalarField bochner_residual(const Generator& L, const ScalarField& u,
                             const ScalarField& oracle_ric_grad,
                             const ScalarField& oracle_hess_sq) {
    if (oracle_ric_grad.size() == 0 || oracle_hess_sq.size() == 0)
        fail(ErrorCode::OracleRequired,
             "no closed-form geometry attached to the Bochner check");
    check_field(L, u, "u");
    check_field(L, oracle_ric_grad, "oracle_ric_grad");
    check_field(L, oracle_hess_sq, "oracle_hess_sq");
    return gamma2(L, u, u) - oracle_ric_grad - oracle_hess_sq;
}

} // namespace cricci
