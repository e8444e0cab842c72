#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cricci/gamma.hpp"
#include "cricci/space.hpp"

namespace cricci {

// Closed-form model geometry: distances, geodesics, the Ricci form and (for
// the Gaussian weight) the log-density. Spheres live in ambient R^{n+1};
// everything else uses intrinsic coordinates.
struct SmoothGeometry {
    enum class Kind { euclidean, sphere, flat_torus, gaussian_ou };

    Kind kind = Kind::euclidean;
    int dim = 1;
    double radius = 1.0;          // sphere only
    std::vector<double> periods;  // flat torus only

    static SmoothGeometry euclidean(int n);
    static SmoothGeometry sphere(int n, double R);
    static SmoothGeometry flat_torus(int n, std::vector<double> periods);
    static SmoothGeometry gaussian_ou(int n);
    // "euclidean:3", "sphere:2:1.0", "torus:2:1.0,1.0", "ou:1"
    static SmoothGeometry parse(const std::string& tag);

    std::string tag() const;
    int ambient_dim() const;
    bool has_weight() const { return kind == Kind::gaussian_ou; }
    double injectivity_radius() const;

    double distance(const Vector& x, const Vector& y) const;
    bool in_cut_locus(const Vector& x, const Vector& y) const;
    Vector exp_map(const Vector& x, const Vector& V, double s) const;
    // initial velocity of the unit-time minimizing geodesic x -> y
    Vector log_map(const Vector& x, const Vector& y) const;
    Vector geodesic_velocity(const Vector& x, const Vector& y, double t) const;

    // Ricci form of the generator's geometry: plain Ricci for unweighted
    // models, Ric + Hess rho for the Gaussian weight.
    double ricci_form(const Vector& x, const Vector& V) const;
    double weight(const Vector& x) const;
    Vector weight_gradient(const Vector& x) const;

    Vector base_point() const;
    Vector random_point(std::mt19937_64& rng) const;
    Vector random_tangent(const Vector& x, std::mt19937_64& rng) const;
};

// 1 - u*cot(u), series-protected near u = 0.
double one_minus_ucotu(double u);

// Closed-form coarse Ricci of the model Laplacian (weighted for gaussian-ou):
// 0 on flat models, (n-1)[d^2/R^2 + (1 - (d/R)cot(d/R))^2] on the sphere,
// |x-y|^2 for the Gaussian weight.
double analytic_coarse_ricci(const SmoothGeometry& geom, const Vector& x,
                             const Vector& y);

struct CurveProbe {
    Vector x;
    Vector V;
    double h = 0.0; // step; <= 0 picks 1e-2 * min(injectivity radius, 1)
};

enum class RecoveryMethod { finite_difference, richardson };

// Ricci form recovered as half the second derivative of
// s -> analytic_coarse_ricci(x, exp(x, V, s)) at s = 0.
double ricci_recovery(const SmoothGeometry& geom, const CurveProbe& probe,
                      RecoveryMethod method = RecoveryMethod::richardson);

// Least-squares slope of log|remainder| vs log s, where the remainder is
// analytic_coarse_ricci minus the Ricci form of the displacement.
double synge_remainder_order(const SmoothGeometry& geom, const Vector& x,
                             const Vector& V,
                             const std::vector<double>& s_grid);

// Gauss-Legendre quadrature of the Ricci form along the minimizing geodesic.
double integral_cric(const SmoothGeometry& geom, const Vector& x,
                     const Vector& y, int quadrature_order = 16);

// Max over the t-grid of |d/dt d_t^2(x,y) + 2 cRic_t(x,y)| along the
// shrinking round-sphere family (flat models: static, residual 0).
double ricci_flow_derivative_check(const SmoothGeometry& geom, const Vector& x,
                                   const Vector& y,
                                   const std::vector<double>& t_grid);

// Dimension-dependent Ricci form Ric + Hess rho - d rho (x) d rho / (N - n).
// N = infinity drops the last term; N = n is -infinity unless d rho(V) = 0;
// N < n is -infinity.
double ric_n_form(const SmoothGeometry& geom, const Vector& x, const Vector& V,
                  double N);

enum class Sampler { fibonacci_sphere, uniform_grid, random };

Sampler parse_sampler(const std::string& name);

struct Discretization {
    std::vector<Vector> points;
    MetricMeasureSpace space; // intrinsic distances, uniform measure
};

Discretization discretize(const SmoothGeometry& geom, Sampler sampler, int N,
                          std::uint64_t seed = 0);

// Pair scan with values from the closed form instead of a discrete operator;
// pairs inside the cut locus are excluded and listed.
CoarseRicciReport analytic_ricci_scan(const SmoothGeometry& geom,
                                      const std::vector<Vector>& points,
                                      const PairFilter& filter);

} // namespace cricci
