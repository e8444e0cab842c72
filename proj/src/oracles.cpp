#include "cricci/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cricci/numeric.hpp"
#include "cricci/parallel.hpp"
#include "cricci/rng.hpp"

namespace cricci {

namespace {

constexpr double kCutMargin = 1e-9;
constexpr double kPi = 3.14159265358979323846;

void check_dim(const SmoothGeometry& g, const Vector& x, const char* name) {
    if (x.size() != g.ambient_dim())
        fail(ErrorCode::DimensionMismatch,
             std::string(name) + " has dimension " + std::to_string(x.size()) +
                 ", geometry expects " + std::to_string(g.ambient_dim()));
}

Vector project_tangent(const SmoothGeometry& g, const Vector& x,
                       const Vector& V) {
    if (g.kind != SmoothGeometry::Kind::sphere) return V;
    return V - x * (x.dot(V) / (g.radius * g.radius));
}

// signed per-axis displacement folded into (-P/2, P/2]
Vector torus_displacement(const SmoothGeometry& g, const Vector& x,
                          const Vector& y) {
    Vector delta(g.dim);
    for (int a = 0; a < g.dim; ++a) {
        double da = std::remainder(y(a) - x(a), g.periods[a]);
        delta(a) = da;
    }
    return delta;
}

struct Quadrature {
    std::vector<double> nodes;   // on [0,1]
    std::vector<double> weights; // summing to 1
};

// Gauss-Legendre nodes by Newton iteration on the recurrence.
Quadrature gauss_legendre(int order) {
    if (order < 1 || order > 128)
        fail(ErrorCode::InvalidInput, "quadrature order out of range");
    Quadrature q;
    q.nodes.resize(order);
    q.weights.resize(order);
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        q.nodes[i] = 0.5 * (1.0 - x);
        q.nodes[order - 1 - i] = 0.5 * (1.0 + x);
        q.weights[i] = 0.5 * w;
        q.weights[order - 1 - i] = 0.5 * w;
    }
    return q;
}

} // namespace

double one_minus_ucotu(double u) {
    const double a = std::abs(u);
    if (a < 0.1) {
        const double u2 = u * u;
        return u2 * (1.0 / 3.0 +
                     u2 * (1.0 / 45.0 +
                           u2 * (2.0 / 945.0 + u2 * (1.0 / 4725.0))));
    }
    return 1.0 - u * (std::cos(u) / std::sin(u));
}

SmoothGeometry SmoothGeometry::euclidean(int n) {
    if (n < 1) fail(ErrorCode::InvalidInput, "dimension must be >= 1");
    SmoothGeometry g;
    g.kind = Kind::euclidean;
    g.dim = n;
    return g;
}

SmoothGeometry SmoothGeometry::sphere(int n, double R) {
    if (n < 1) fail(ErrorCode::InvalidInput, "dimension must be >= 1");
    if (!(R > 0.0)) fail(ErrorCode::InvalidInput, "radius must be positive");
    SmoothGeometry g;
    g.kind = Kind::sphere;
    g.dim = n;
    g.radius = R;
    return g;
}

SmoothGeometry SmoothGeometry::flat_torus(int n, std::vector<double> periods) {
    if (n < 1) fail(ErrorCode::InvalidInput, "dimension must be >= 1");
    if (static_cast<int>(periods.size()) != n)
        fail(ErrorCode::DimensionMismatch, "need one period per dimension");
    for (double p : periods)
        if (!(p > 0.0)) fail(ErrorCode::InvalidInput, "periods must be positive");
    SmoothGeometry g;
    g.kind = Kind::flat_torus;
    g.dim = n;
    g.periods = std::move(periods);
    return g;
}

SmoothGeometry SmoothGeometry::gaussian_ou(int n) {
    if (n < 1) fail(ErrorCode::InvalidInput, "dimension must be >= 1");
    SmoothGeometry g;
    g.kind = Kind::gaussian_ou;
    g.dim = n;
    return g;
}

SmoothGeometry SmoothGeometry::parse(const std::string& tag) {
    std::vector<std::string> parts;
    std::stringstream ss(tag);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    try {
        if (parts.size() == 2 && parts[0] == "euclidean")
            return euclidean(std::stoi(parts[1]));
        if (parts.size() == 3 && parts[0] == "sphere")
            return sphere(std::stoi(parts[1]), std::stod(parts[2]));
        if (parts.size() == 2 && parts[0] == "ou")
            return gaussian_ou(std::stoi(parts[1]));
        if (parts.size() == 3 && parts[0] == "torus") {
            const int n = std::stoi(parts[1]);
            std::vector<double> periods;
            std::stringstream ps(parts[2]);
            while (std::getline(ps, item, ','))
                periods.push_back(std::stod(item));
            return flat_torus(n, std::move(periods));
        }
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    fail(ErrorCode::InvalidInput,
         "cannot parse geometry '" + tag +
             "' (expected euclidean:n, sphere:n:R, torus:n:p1,..,pn, ou:n)");
}

std::string SmoothGeometry::tag() const {
    std::ostringstream out;
    switch (kind) {
    case Kind::euclidean:
        out << "euclidean:" << dim;
        break;
    case Kind::sphere:
        out << "sphere:" << dim << ":" << radius;
        break;
    case Kind::flat_torus:
        out << "torus:" << dim << ":";
        for (std::size_t i = 0; i < periods.size(); ++i)
            out << (i ? "," : "") << periods[i];
        break;
    case Kind::gaussian_ou:
        out << "ou:" << dim;
        break;
    }
    return out.str();
}

int SmoothGeometry::ambient_dim() const {
    return kind == Kind::sphere ? dim + 1 : dim;
}

double SmoothGeometry::injectivity_radius() const {
    switch (kind) {
    case Kind::sphere:
        return kPi * radius;
    case Kind::flat_torus:
        return 0.5 * *std::min_element(periods.begin(), periods.end());
    default:
        return std::numeric_limits<double>::infinity();
    }
}

double SmoothGeometry::distance(const Vector& x, const Vector& y) const {
    check_dim(*this, x, "x");
    check_dim(*this, y, "y");
    switch (kind) {
    case Kind::sphere: {
        if (x == y) return 0.0;
        const double c =
            std::clamp(x.dot(y) / (radius * radius), -1.0, 1.0);
        return radius * std::acos(c);
    }
    case Kind::flat_torus:
        return torus_displacement(*this, x, y).norm();
    default:
        return (x - y).norm();
    }
}

bool SmoothGeometry::in_cut_locus(const Vector& x, const Vector& y) const {
    switch (kind) {
    case Kind::sphere:
        return distance(x, y) >= kPi * radius - kCutMargin;
    case Kind::flat_torus: {
        const Vector delta = torus_displacement(*this, x, y);
        for (int a = 0; a < dim; ++a)
            if (std::abs(delta(a)) >= 0.5 * periods[a] - kCutMargin)
                return true;
        return false;
    }
    default:
        return false;
    }
}

Vector SmoothGeometry::exp_map(const Vector& x, const Vector& V,
                               double s) const {
    check_dim(*this, x, "x");
    check_dim(*this, V, "V");
    switch (kind) {
    case Kind::sphere: {
        const Vector Vt = project_tangent(*this, x, V);
        const double speed = Vt.norm();
        if (speed * std::abs(s) < 1e-300) return x;
        const double theta = s * speed / radius;
        return x * std::cos(theta) +
               (radius / speed) * Vt * std::sin(theta);
    }
    case Kind::flat_torus: {
        Vector p = x + s * V;
        for (int a = 0; a < dim; ++a) {
            p(a) = std::fmod(p(a), periods[a]);
            if (p(a) < 0.0) p(a) += periods[a];
        }
        return p;
    }
    default:
        return x + s * V;
    }
}

Vector SmoothGeometry::log_map(const Vector& x, const Vector& y) const {
    if (in_cut_locus(x, y))
        fail(ErrorCode::CutLocusPair,
             "no unique minimizing geodesic between the pair");
    switch (kind) {
    case Kind::sphere: {
        const double d = distance(x, y);
        if (d < 1e-14) return Vector::Zero(ambient_dim());
        const double theta = d / radius;
        const Vector w = y - x * std::cos(theta);
        return (d / w.norm()) * w;
    }
    case Kind::flat_torus:
        return torus_displacement(*this, x, y);
    default:
        return y - x;
    }
}

Vector SmoothGeometry::geodesic_velocity(const Vector& x, const Vector& y,
                                         double t) const {
    const Vector W = log_map(x, y);
    if (kind != Kind::sphere) return W;
    const double d = W.norm();
    if (d < 1e-14) return W;
    const double phi = t * d / radius;
    const Vector u = W / d;
    return (d / radius) * (-x * std::sin(phi) + radius * u * std::cos(phi));
}

double SmoothGeometry::ricci_form(const Vector& x, const Vector& V) const {
    check_dim(*this, x, "x");
    check_dim(*this, V, "V");
    switch (kind) {
    case Kind::sphere: {
        const Vector Vt = project_tangent(*this, x, V);
        return (dim - 1) / (radius * radius) * Vt.squaredNorm();
    }
    case Kind::gaussian_ou:
        // Ric = 0, Hess rho = identity
        return V.squaredNorm();
    default:
        return 0.0;
    }
}

double SmoothGeometry::weight(const Vector& x) const {
    return kind == Kind::gaussian_ou ? 0.5 * x.squaredNorm() : 0.0;
}

Vector SmoothGeometry::weight_gradient(const Vector& x) const {
    return kind == Kind::gaussian_ou ? x : Vector::Zero(ambient_dim());
}

Vector SmoothGeometry::base_point() const {
    Vector x = Vector::Zero(ambient_dim());
    if (kind == Kind::sphere) x(0) = radius;
    return x;
}

Vector SmoothGeometry::random_point(std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x(ambient_dim());
    switch (kind) {
    case Kind::sphere:
        do {
            for (int a = 0; a < ambient_dim(); ++a) x(a) = gauss(rng);
        } while (x.norm() < 1e-8);
        return radius * x / x.norm();
    case Kind::flat_torus:
        for (int a = 0; a < dim; ++a) x(a) = unit(rng) * periods[a];
        return x;
    default:
        for (int a = 0; a < dim; ++a) x(a) = gauss(rng);
        return x;
    }
}

Vector SmoothGeometry::random_tangent(const Vector& x,
                                      std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(ambient_dim());
    double norm = 0;
    do {
        for (int a = 0; a < ambient_dim(); ++a) v(a) = gauss(rng);
        v = project_tangent(*this, x, v);
        norm = v.norm();
    } while (norm < 1e-8);
    return v / norm;
}

double analytic_coarse_ricci(const SmoothGeometry& geom, const Vector& x,
                             const Vector& y) {
    if (geom.in_cut_locus(x, y))
        fail(ErrorCode::CutLocusPair,
             "coarse Ricci closed form undefined on the cut locus");
    const double d = geom.distance(x, y);
    switch (geom.kind) {
    case SmoothGeometry::Kind::sphere: {
        const double u = d / geom.radius;
        const double r = one_minus_ucotu(u);
        return (geom.dim - 1) * (u * u + r * r);
    }
    case SmoothGeometry::Kind::gaussian_ou:
        return d * d;
    default:
        return 0.0;
    }
}

double ricci_recovery(const SmoothGeometry& geom, const CurveProbe& probe,
                      RecoveryMethod method) {
    const double speed = probe.V.norm();
    if (speed == 0.0)
        fail(ErrorCode::InvalidInput, "probe direction must be nonzero");
    const double inj = geom.injectivity_radius();
    const double h =
        probe.h > 0.0 ? probe.h : 1e-2 * std::min(inj, 1.0);
    if (h * speed >= inj - 1e-6)
        fail(ErrorCode::StepTooLarge,
             "step " + std::to_string(h) + " leaves the injectivity radius");

    const auto curve = [&](double s) {
        return analytic_coarse_ricci(geom, probe.x,
                                     geom.exp_map(probe.x, probe.V, s));
    };
    const auto second = [&](double step) {
        return (curve(step) - 2.0 * curve(0.0) + curve(-step)) / (step * step);
    };
    if (method == RecoveryMethod::finite_difference) return 0.5 * second(h);
    return 0.5 * (4.0 * second(0.5 * h) - second(h)) / 3.0;
}

double synge_remainder_order(const SmoothGeometry& geom, const Vector& x,
                             const Vector& V,
                             const std::vector<double>& s_grid) {
    if (V.norm() == 0.0)
        fail(ErrorCode::InvalidInput, "probe direction must be nonzero");
    if (s_grid.size() < 2)
        fail(ErrorCode::InvalidInput, "need >= 2 step values");
    const double inj = geom.injectivity_radius();
    std::vector<double> logs, logr;
    double worst = 0;
    for (double s : s_grid) {
        if (!(s > 0.0))
            fail(ErrorCode::InvalidInput, "step values must be positive");
        if (s * V.norm() >= inj - 1e-6)
            fail(ErrorCode::StepTooLarge,
                 "step leaves the injectivity radius");
        const double r =
            analytic_coarse_ricci(geom, x, geom.exp_map(x, V, s)) -
            geom.ricci_form(x, s * V);
        worst = std::max(worst, std::abs(r));
        if (std::abs(r) > 0.0) {
            logs.push_back(std::log(s));
            logr.push_back(std::log(std::abs(r)));
        }
    }
    if (worst < 1e-14)
        fail(ErrorCode::RemainderBelowNoiseFloor,
             "remainder is identically zero at the noise floor");
    return least_squares_slope(logs, logr);
}

double integral_cric(const SmoothGeometry& geom, const Vector& x,
                     const Vector& y, int quadrature_order) {
    if (geom.distance(x, y) < 1e-14) return 0.0;
    const Quadrature q = gauss_legendre(quadrature_order);
    double acc = 0;
    for (int i = 0; i < quadrature_order; ++i) {
        const double t = q.nodes[i];
        acc += q.weights[i] * geom.ricci_form(geom.exp_map(x, geom.log_map(x, y), t),
                                              geom.geodesic_velocity(x, y, t));
    }
    return acc;
}

double ricci_flow_derivative_check(const SmoothGeometry& geom, const Vector& x,
                                   const Vector& y,
                                   const std::vector<double>& t_grid) {
    if (t_grid.empty())
        fail(ErrorCode::InvalidInput, "flow check needs a nonempty t-grid");
    if (geom.kind == SmoothGeometry::Kind::gaussian_ou)
        fail(ErrorCode::InvalidInput,
             "the flow identity is checked on unweighted models only");

    const double d0 = geom.distance(x, y);
    double residual = 0;
    if (geom.kind == SmoothGeometry::Kind::sphere) {
        const double R = geom.radius;
        const double rate = 2.0 * (geom.dim - 1) / (R * R);
        for (double t : t_grid) {
            const double c = 1.0 - rate * t;
            if (c <= 1e-12)
                fail(ErrorCode::FlowExtinct,
                     "t = " + std::to_string(t) +
                         " is beyond the extinction time");
            const double deriv = -rate * d0 * d0;
            const SmoothGeometry shrunk =
                SmoothGeometry::sphere(geom.dim, R * std::sqrt(c));
            const double cric =
                integral_cric(shrunk, std::sqrt(c) * x, std::sqrt(c) * y);
            residual = std::max(residual, std::abs(deriv + 2.0 * cric));
        }
        return residual;
    }
    for (double t : t_grid) {
        (void)t; // flat models are static under the flow
        residual = std::max(residual, std::abs(2.0 * integral_cric(geom, x, y)));
    }
    return residual;
}

double ric_n_form(const SmoothGeometry& geom, const Vector& x, const Vector& V,
                  double N) {
    const double inf = std::numeric_limits<double>::infinity();
    const int n = geom.dim;
    double base = 0;
    if (geom.kind == SmoothGeometry::Kind::sphere)
        base = geom.ricci_form(x, V);
    const bool weighted = geom.has_weight();
    const double hess = weighted ? V.squaredNorm() : 0.0;
    const double drho = weighted ? x.dot(V) : 0.0;

    if (N == inf) return base + hess;
    if (N < n - 1e-12) return -inf;
    if (std::abs(N - n) <= 1e-12) {
        const double scale = std::max(1.0, x.norm() * V.norm());
        return std::abs(drho) <= 1e-12 * scale ? base + hess : -inf;
    }
    return base + hess - drho * drho / (N - n);
}

Sampler parse_sampler(const std::string& name) {
    if (name == "fibonacci" || name == "fibonacci-sphere")
        return Sampler::fibonacci_sphere;
    if (name == "grid" || name == "uniform-grid") return Sampler::uniform_grid;
    if (name == "random") return Sampler::random;
    fail(ErrorCode::UnsupportedSampler, "unknown sampler '" + name + "'");
}

Discretization discretize(const SmoothGeometry& geom, Sampler sampler, int N,
                          std::uint64_t seed) {
    if (N < 2) fail(ErrorCode::InvalidInput, "need >= 2 sample points");
    std::vector<Vector> pts;
    pts.reserve(N);
    switch (sampler) {
    case Sampler::fibonacci_sphere: {
        if (geom.kind != SmoothGeometry::Kind::sphere || geom.dim != 2)
            fail(ErrorCode::UnsupportedSampler,
                 "fibonacci sampling needs sphere:2");
        const double ga = kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < N; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / N;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vector p(3);
            p << r * std::cos(ga * i), r * std::sin(ga * i), z;
            pts.push_back(geom.radius * p);
        }
        break;
    }
    case Sampler::uniform_grid: {
        if (geom.kind != SmoothGeometry::Kind::flat_torus)
            fail(ErrorCode::UnsupportedSampler,
                 "uniform-grid sampling needs a flat torus");
        const int m = static_cast<int>(
            std::llround(std::pow(static_cast<double>(N), 1.0 / geom.dim)));
        int total = 1;
        for (int a = 0; a < geom.dim; ++a) total *= m;
        if (total != N)
            fail(ErrorCode::InvalidInput,
                 "N must be a perfect " + std::to_string(geom.dim) +
                     "-th power for a torus lattice");
        for (int i = 0; i < N; ++i) {
            Vector p(geom.dim);
            int rest = i;
            for (int a = geom.dim - 1; a >= 0; --a) {
                p(a) = (rest % m) * geom.periods[a] / m;
                rest /= m;
            }
            pts.push_back(p);
        }
        break;
    }
    case Sampler::random: {
        if (geom.kind != SmoothGeometry::Kind::sphere &&
            geom.kind != SmoothGeometry::Kind::flat_torus)
            fail(ErrorCode::UnsupportedSampler,
                 "random sampling needs a compact model");
        auto rng = substream(seed, 0);
        for (int i = 0; i < N; ++i) pts.push_back(geom.random_point(rng));
        break;
    }
    }

    Matrix dist(N, N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
        const int a = static_cast<int>(i);
        dist(a, a) = 0.0;
        for (int j = a + 1; j < N; ++j)
            dist(a, j) = geom.distance(pts[i], pts[j]);
    });
    for (int a = 0; a < N; ++a)
        for (int j = 0; j < a; ++j) dist(a, j) = dist(j, a);
    return Discretization{std::move(pts),
                          build_space(std::move(dist), {}, true, {})};
}

CoarseRicciReport analytic_ricci_scan(const SmoothGeometry& geom,
                                      const std::vector<Vector>& points,
                                      const PairFilter& filter) {
    const int n = static_cast<int>(points.size());
    if (n < 2) fail(ErrorCode::InvalidInput, "need >= 2 sample points");

    std::vector<std::pair<int, int>> pairs;
    switch (filter.mode) {
    case PairFilter::Mode::all:
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b) pairs.emplace_back(a, b);
        break;
    case PairFilter::Mode::maxdist:
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b &&
                    geom.distance(points[a], points[b]) <= filter.max_distance)
                    pairs.emplace_back(a, b);
        break;
    case PairFilter::Mode::random: {
        auto rng = substream(filter.seed, 0);
        std::uniform_int_distribution<int> pick(0, n - 1);
        while (static_cast<int>(pairs.size()) < filter.count) {
            const int a = pick(rng);
            const int b = pick(rng);
            if (a != b) pairs.emplace_back(a, b);
        }
        break;
    }
    }

    CoarseRicciReport report;
    std::vector<std::pair<int, int>> kept;
    for (auto [a, b] : pairs) {
        if (geom.in_cut_locus(points[a], points[b]))
            report.cut_pairs.emplace_back(a, b);
        else
            kept.push_back({a, b});
    }
    if (kept.empty())
        fail(ErrorCode::NoAdmissiblePairs,
             "every sampled pair lies in the cut locus");
    report.pairs.resize(kept.size());
    parallel_for(kept.size(), [&](std::size_t i) {
        const auto [a, b] = kept[i];
        const double d = geom.distance(points[a], points[b]);
        const double ric = analytic_coarse_ricci(geom, points[a], points[b]);
        report.pairs[i] = PairValue{a, b, d, ric, ric / (d * d)};
    });
    double kmin = std::numeric_limits<double>::infinity();
    for (const auto& p : report.pairs) kmin = std::min(kmin, p.ratio);
    report.K_est = kmin;
    return report;
}

} // namespace cricci
