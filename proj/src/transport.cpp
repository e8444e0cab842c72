#include "cricci/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "cricci/builders.hpp"
#include "cricci/numeric.hpp"

namespace cricci {

DiscreteMeasure make_measure(Vector weights) {
    for (int i = 0; i < weights.size(); ++i)
        if (weights(i) < 0.0)
            fail(ErrorCode::InvalidInput,
                 "measure has a negative weight at index " +
                     std::to_string(i));
    const double total = weights.sum();
    if (std::abs(total - 1.0) > 1e-12)
        fail(ErrorCode::InvalidInput,
             "measure mass is " + std::to_string(total) + ", expected 1");
    return DiscreteMeasure{std::move(weights)};
}

namespace {

// Exact transportation simplex on a dense cost matrix. Keeps a spanning-tree
// basis of n+m-1 cells (zero-flow cells on degenerate instances), pivots on
// the most negative reduced cost, and falls back to Bland's rule if the
// degenerate pivots pile up.
struct SimplexResult {
    Matrix plan;
    double primal; // sum flow * cost
    double dual;   // sum a u + sum b v
};

struct Cell {
    int i, j;
    double flow;
};

SimplexResult transport_simplex(const Matrix& cost, const Vector& a,
                                const Vector& b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    const int nodes = n + m;

    std::vector<Cell> cells;
    cells.reserve(nodes - 1);
    std::vector<std::vector<int>> adj(nodes); // node -> basic cell ids
    std::vector<std::vector<char>> basic(n, std::vector<char>(m, 0));

    auto link = [&](int id) {
        adj[cells[id].i].push_back(id);
        adj[n + cells[id].j].push_back(id);
        basic[cells[id].i][cells[id].j] = 1;
    };
    auto unlink = [&](int id) {
        for (int node : {cells[id].i, n + cells[id].j}) {
            auto& v = adj[node];
            v.erase(std::find(v.begin(), v.end(), id));
        }
        basic[cells[id].i][cells[id].j] = 0;
    };

    { // northwest-corner start
        Vector ra = a, rb = b;
        int i = 0, j = 0;
        while (true) {
            const double t = std::min(ra(i), rb(j));
            cells.push_back(Cell{i, j, t});
            link(static_cast<int>(cells.size()) - 1);
            ra(i) -= t;
            rb(j) -= t;
            if (i == n - 1 && j == m - 1) break;
            if (ra(i) <= 0.0 && i < n - 1)
                ++i;
            else
                ++j;
        }
    }

    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    std::vector<double> pot(nodes);
    std::vector<char> seen(nodes);
    std::vector<int> parent_node(nodes), parent_cell(nodes);

    const long max_iter = 1000 + 200L * nodes;
    const long bland_after = 100 + 50L * nodes;
    for (long iter = 0;; ++iter) {
        if (iter > max_iter)
            fail(ErrorCode::NumericFailure,
                 "transport simplex exceeded the iteration cap");

        // potentials from the tree: u_i + v_j = c_ij on basic cells
        std::fill(seen.begin(), seen.end(), 0);
        std::queue<int> q;
        pot[0] = 0.0;
        seen[0] = 1;
        q.push(0);
        while (!q.empty()) {
            const int node = q.front();
            q.pop();
            for (int id : adj[node]) {
                const int other =
                    node < n ? n + cells[id].j : cells[id].i;
                if (seen[other]) continue;
                seen[other] = 1;
                pot[other] = cost(cells[id].i, cells[id].j) - pot[node];
                q.push(other);
            }
        }

        // entering cell
        int ei = -1, ej = -1;
        double best = -tol;
        const bool bland = iter > bland_after;
        for (int i = 0; i < n && (ei < 0 || !bland); ++i)
            for (int j = 0; j < m; ++j) {
                if (basic[i][j]) continue;
                const double r = cost(i, j) - pot[i] - pot[n + j];
                if (r < best) {
                    best = r;
                    ei = i;
                    ej = j;
                    if (bland) break;
                }
            }
        if (ei < 0) break; // optimal

        // cycle: tree path from row node ei to column node ej
        std::fill(seen.begin(), seen.end(), 0);
        seen[ei] = 1;
        parent_node[ei] = -1;
        q.push(ei);
        while (!q.empty()) {
            const int node = q.front();
            q.pop();
            if (node == n + ej) break;
            for (int id : adj[node]) {
                const int other =
                    node < n ? n + cells[id].j : cells[id].i;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_node[other] = node;
                parent_cell[other] = id;
                q.push(other);
            }
        }
        // path cells from the ej end back to ei, signs -,+,-,...
        std::vector<int> path;
        for (int node = n + ej; parent_node[node] != -1;
             node = parent_node[node])
            path.push_back(parent_cell[node]);

        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        for (std::size_t t = 0; t < path.size(); t += 2) {
            const double f = cells[path[t]].flow;
            if (f < theta || (f == theta && path[t] < leaving)) {
                theta = f;
                leaving = path[t];
            }
        }
        for (std::size_t t = 0; t < path.size(); ++t)
            cells[path[t]].flow += (t % 2 == 0) ? -theta : theta;

        unlink(leaving);
        cells[leaving] = Cell{ei, ej, theta};
        link(leaving);
    }

    SimplexResult out;
    out.plan = Matrix::Zero(n, m);
    out.primal = 0;
    for (const auto& c : cells) {
        const double f = std::max(c.flow, 0.0);
        out.plan(c.i, c.j) += f;
        out.primal += f * cost(c.i, c.j);
    }
    out.dual = 0;
    for (int i = 0; i < n; ++i) out.dual += a(i) * pot[i];
    for (int j = 0; j < m; ++j) out.dual += b(j) * pot[n + j];
    return out;
}

// Monotone quantile coupling on the line; optimal for |x-y|^p, p >= 1.
WassersteinResult line_transport(const MetricMeasureSpace& space,
                                 const Vector& mu, const Vector& nu, int p) {
    const int n = space.n();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int u, int v) {
        return space.line_coords[u] < space.line_coords[v];
    });

    Matrix plan = Matrix::Zero(n, n);
    double primal = 0;
    int i = 0, j = 0;
    double ai = mu(order[0]), bj = nu(order[0]);
    while (i < n && j < n) {
        const double t = std::min(ai, bj);
        if (t > 0.0) {
            plan(order[i], order[j]) += t;
            const double gap = std::abs(space.line_coords[order[i]] -
                                        space.line_coords[order[j]]);
            primal += t * (p == 1 ? gap : gap * gap);
        }
        ai -= t;
        bj -= t;
        if (ai <= 0.0 && ++i < n) ai = mu(order[i]);
        if (bj <= 0.0 && ++j < n) bj = nu(order[j]);
    }

    const double value = p == 1 ? primal : std::sqrt(primal);
    return WassersteinResult{value, TransportPlan{std::move(plan), value, p},
                             0.0};
}

} // namespace

WassersteinResult wasserstein(const MetricMeasureSpace& space,
                              const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu, int p,
                              TransportMethod method) {
    const int n = space.n();
    if (mu.weights.size() != n || nu.weights.size() != n)
        fail(ErrorCode::MeasureMismatch,
             "measures live on " + std::to_string(mu.weights.size()) + "/" +
                 std::to_string(nu.weights.size()) + " points, space has " +
                 std::to_string(n));
    if (p != 1 && p != 2)
        fail(ErrorCode::InvalidInput, "transport order p must be 1 or 2");
    if (method == TransportMethod::line && !space.is_line())
        fail(ErrorCode::InvalidInput,
             "line transport needs a space with line coordinates");

    if ((mu.weights - nu.weights).cwiseAbs().maxCoeff() == 0.0) {
        TransportPlan plan{Matrix(mu.weights.asDiagonal()), 0.0, p};
        return WassersteinResult{0.0, std::move(plan), 0.0};
    }

    const bool use_line = method == TransportMethod::line ||
                          (method == TransportMethod::automatic &&
                           space.is_line());
    if (use_line) return line_transport(space, mu.weights, nu.weights, p);

    Matrix cost(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost(i, j) = p == 1 ? space.d(i, j)
                                : space.d(i, j) * space.d(i, j);
    SimplexResult r = transport_simplex(cost, mu.weights, nu.weights);
    const double value = p == 1 ? r.primal : std::sqrt(std::max(r.primal, 0.0));
    return WassersteinResult{value, TransportPlan{std::move(r.plan), value, p},
                             std::abs(r.primal - r.dual)};
}

double entropy(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.weights.size() != nu.weights.size())
        fail(ErrorCode::MeasureMismatch,
             "entropy needs measures on the same point set");
    double acc = 0;
    for (int i = 0; i < mu.weights.size(); ++i) {
        const double m = mu.weights(i), v = nu.weights(i);
        if (m == 0.0) continue;
        if (v == 0.0) return std::numeric_limits<double>::infinity();
        acc += m * std::log(m / v);
    }
    return acc;
}

double ollivier_kappa(const MetricMeasureSpace& space,
                      const Matrix& step_kernel, int x, int y) {
    const int n = space.n();
    if (step_kernel.rows() != n || step_kernel.cols() != n)
        fail(ErrorCode::DimensionMismatch,
             "step kernel must be square on the space's points");
    if (x < 0 || x >= n || y < 0 || y >= n)
        fail(ErrorCode::InvalidInput, "point index out of range");
    if (x == y) fail(ErrorCode::SamePoint, "kappa needs x != y");
    for (int i : {x, y}) {
        if (step_kernel.row(i).minCoeff() < -1e-12)
            fail(ErrorCode::InvalidInput,
                 "step kernel row " + std::to_string(i) +
                     " has negative mass");
        if (std::abs(step_kernel.row(i).sum() - 1.0) > 1e-8)
            fail(ErrorCode::InvalidInput,
                 "step kernel row " + std::to_string(i) +
                     " is not a probability vector");
    }
    auto row_measure = [&](int i) {
        Vector w = step_kernel.row(i).transpose().cwiseMax(0.0);
        w /= w.sum();
        return make_measure(std::move(w));
    };
    const double w1 =
        wasserstein(space, row_measure(x), row_measure(y), 1).value;
    return 1.0 - w1 / space.d(x, y);
}

Matrix lazy_step_kernel(const Generator& L) {
    const int n = L.n();
    double rate = 0;
    Matrix Ld(L.matrix);
    for (int i = 0; i < n; ++i) rate = std::max(rate, std::abs(Ld(i, i)));
    if (rate == 0.0) return Matrix::Identity(n, n);
    Matrix P = Matrix::Identity(n, n) + Ld / rate;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (P(i, j) < 0.0) {
                if (P(i, j) < -1e-12)
                    fail(ErrorCode::NotAGenerator,
                         "lazy step kernel needs nonnegative off-diagonals");
                P(i, j) = 0.0;
            }
    return P;
}

DecayFit contraction_rate(const Generator& L, const MetricMeasureSpace& space,
                          int x, int y, const std::vector<double>& t_grid,
                          int p) {
    if (L.n() != space.n())
        fail(ErrorCode::DimensionMismatch, "operator and space sizes differ");
    if (x < 0 || x >= space.n() || y < 0 || y >= space.n())
        fail(ErrorCode::InvalidInput, "point index out of range");
    if (x == y) fail(ErrorCode::SamePoint, "contraction needs x != y");
    if (t_grid.size() < 3)
        fail(ErrorCode::InvalidInput, "t-grid needs >= 3 points");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            fail(ErrorCode::InvalidInput, "t-grid must be increasing");

    DecayFit fit;
    fit.times = t_grid;
    std::vector<double> logw;
    for (double t : t_grid) {
        const Matrix P = semigroup_matrix(L, t);
        auto row_measure = [&](int i) {
            Vector w = P.row(i).transpose();
            w /= w.sum();
            return make_measure(std::move(w));
        };
        const double w =
            wasserstein(space, row_measure(x), row_measure(y), p).value;
        fit.distances.push_back(w);
        if (w < 1e-13)
            fail(ErrorCode::DegenerateDecay,
                 "transport distance fell below 1e-13 at t = " +
                     std::to_string(t));
        logw.push_back(std::log(w));
    }
    fit.rate = -least_squares_slope(fit.times, logw);
    return fit;
}

} // namespace cricci
