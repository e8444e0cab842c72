#pragma once

#include <vector>

#include "cricci/generator.hpp"
#include "cricci/space.hpp"

namespace cricci {

struct DiscreteMeasure {
    Vector weights; // nonnegative, sums to 1
};

// Validates nonnegativity and total mass 1 within 1e-12.
DiscreteMeasure make_measure(Vector weights);

struct TransportPlan {
    Matrix coupling; // row sums = source, column sums = target
    double cost;     // the W_p value (p-th root of the optimal d^p cost)
    int p;
};

enum class TransportMethod {
    automatic,      // order statistics on 1D line spaces, LP otherwise
    linear_program, // exact transportation simplex
    line            // 1D quantile walk; requires line coordinates
};

struct WassersteinResult {
    double value;
    TransportPlan plan;
    double dual_gap; // |primal - dual| of the LP; 0 for the line path
};

// Exact W_p between two measures on the space's points, p in {1, 2}.
WassersteinResult wasserstein(const MetricMeasureSpace& space,
                              const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu, int p,
                              TransportMethod method =
                                  TransportMethod::automatic);

// Relative entropy sum mu_i log(mu_i / nu_i) with 0 log 0 = 0; +infinity
// when mu charges a nu-null point.
double entropy(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// kappa(x,y) = 1 - W_1(m_x, m_y) / d(x,y) for the rows m_x, m_y of a
// row-stochastic step kernel.
double ollivier_kappa(const MetricMeasureSpace& space,
                      const Matrix& step_kernel, int x, int y);

// One-step kernel P = I + eps L with eps = 1 / max |L(x,x)|.
Matrix lazy_step_kernel(const Generator& L);

struct DecayFit {
    double rate; // negated slope of log W_p vs t
    std::vector<double> times;
    std::vector<double> distances;
};

// Exponential decay rate of t -> W_p(P_t delta_x, P_t delta_y).
DecayFit contraction_rate(const Generator& L, const MetricMeasureSpace& space,
                          int x, int y, const std::vector<double>& t_grid,
                          int p);

} // namespace cricci
