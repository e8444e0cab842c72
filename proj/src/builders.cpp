#include "cricci/builders.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "cricci/parallel.hpp"

namespace cricci {

namespace {

std::vector<std::vector<std::pair<int, double>>> adjacency_of(
    const std::vector<Edge>& edges,
    std::unordered_map<std::string, int>& index,
    std::vector<std::string>& labels) {
    for (const auto& e : edges) {
        if (!(e.w > 0.0))
            fail(ErrorCode::NonpositiveWeight,
                 "edge {" + e.u + "," + e.v + "} has weight " +
                     std::to_string(e.w));
        for (const std::string* s : {&e.u, &e.v}) {
            if (index.emplace(*s, static_cast<int>(labels.size())).second)
                labels.push_back(*s);
        }
    }
    // parallel edges accumulate; self-loops act trivially on the Laplacian
    // and are dropped
    std::vector<std::map<int, double>> acc(labels.size());
    for (const auto& e : edges) {
        const int a = index.at(e.u), b = index.at(e.v);
        if (a == b) continue;
        acc[a][b] += e.w;
        acc[b][a] += e.w;
    }
    std::vector<std::vector<std::pair<int, double>>> adj(labels.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        adj[i].assign(acc[i].begin(), acc[i].end());
    return adj;
}

std::vector<int> largest_component(
    const std::vector<std::vector<std::pair<int, double>>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        comp[s] = ncomp;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (auto [v, w] : adj[u])
                if (comp[v] < 0) {
                    comp[v] = ncomp;
                    q.push(v);
                }
        }
        ++ncomp;
    }
    std::vector<int> sizes(ncomp, 0);
    for (int c : comp) ++sizes[c];
    const int best = static_cast<int>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (comp[i] == best) keep.push_back(i);
    return keep;
}

} // namespace

GraphOperator graph_generator(const std::vector<Edge>& edges,
                              DistanceMode mode) {
    if (edges.empty()) fail(ErrorCode::InvalidInput, "edge list is empty");
    std::unordered_map<std::string, int> index;
    std::vector<std::string> labels;
    auto adj = adjacency_of(edges, index, labels);

    std::vector<std::string> warnings;
    std::vector<int> keep = largest_component(adj);
    if (keep.size() != labels.size()) {
        warnings.push_back(
            "disconnected input: kept largest component with " +
            std::to_string(keep.size()) + " of " +
            std::to_string(labels.size()) + " vertices");
        std::vector<int> remap(labels.size(), -1);
        for (std::size_t i = 0; i < keep.size(); ++i)
            remap[keep[i]] = static_cast<int>(i);
        std::vector<std::vector<std::pair<int, double>>> sub(keep.size());
        std::vector<std::string> sublabels(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            sublabels[i] = labels[keep[i]];
            for (auto [v, w] : adj[keep[i]])
                if (remap[v] >= 0) sub[i].emplace_back(remap[v], w);
        }
        adj = std::move(sub);
        labels = std::move(sublabels);
    }
    const int n = static_cast<int>(labels.size());
    if (n < 2)
        fail(ErrorCode::InvalidInput,
             "graph needs >= 2 connected vertices");

    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i) {
        double deg = 0;
        for (auto [j, w] : adj[i]) {
            trips.emplace_back(i, j, w);
            deg += w;
        }
        trips.emplace_back(i, i, -deg);
    }
    SparseMatrix M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());

    Matrix dist(n, n);
    const double inf = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
        std::vector<double> d(n, inf);
        if (mode == DistanceMode::unit_hop) {
            std::queue<int> q;
            d[s] = 0;
            q.push(s);
            while (!q.empty()) {
                const int u = q.front();
                q.pop();
                for (auto [v, w] : adj[u])
                    if (d[v] == inf) {
                        d[v] = d[u] + 1;
                        q.push(v);
                    }
            }
        } else {
            using Item = std::pair<double, int>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
            d[s] = 0;
            q.emplace(0.0, s);
            while (!q.empty()) {
                auto [du, u] = q.top();
                q.pop();
                if (du > d[u]) continue;
                for (auto [v, w] : adj[u])
                    if (du + w < d[v]) {
                        d[v] = du + w;
                        q.emplace(d[v], v);
                    }
            }
        }
        for (int j = 0; j < n; ++j) dist(s, j) = d[j];
    }

    GraphOperator out{make_generator(std::move(M), GeneratorKind::markov),
                      build_space(std::move(dist), {}, true, labels),
                      std::move(warnings)};
    return out;
}

KernelOperator pointcloud_generator(const std::vector<Vector>& points,
                                    const KernelConfig& config) {
    const int n = static_cast<int>(points.size());
    if (n < 2) fail(ErrorCode::InvalidInput, "need >= 2 points");
    const int dim = static_cast<int>(points[0].size());
    for (const auto& p : points)
        if (p.size() != dim)
            fail(ErrorCode::DimensionMismatch,
                 "points have mixed ambient dimensions");
    if (!(config.bandwidth > 0.0))
        fail(ErrorCode::NonpositiveBandwidth,
             "kernel bandwidth must be positive");
    const double t = config.bandwidth;
    const double cutoff =
        config.cutoff > 0.0 ? config.cutoff : 6.0 * std::sqrt(t);

    Matrix dist(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        for (int j = 0; j < n; ++j)
            dist(static_cast<int>(i), j) = (points[i] - points[j]).norm();
    });
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist(i, j) < 1e-12)
                fail(ErrorCode::DuplicatePoints,
                     "points " + std::to_string(i) + " and " +
                         std::to_string(j) + " coincide");

    // kernel weights within the cutoff, then the density correction (if
    // requested), then row normalization
    std::vector<std::vector<std::pair<int, double>>> kern(n);
    Vector q(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        double sum = 0;
        for (int j = 0; j < n; ++j) {
            const double d = dist(static_cast<int>(i), j);
            if (d > cutoff) continue;
            const double k = std::exp(-d * d / (4.0 * t));
            kern[i].emplace_back(j, k);
            sum += k;
        }
        q(static_cast<int>(i)) = sum;
    });
    if (config.normalization == KernelNormalization::fokker_planck) {
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
            for (auto& [j, k] : kern[i])
                k /= q(static_cast<int>(i)) * q(j);
        });
    }

    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i) {
        double rowsum = 0;
        for (auto [j, k] : kern[i]) rowsum += k;
        double offdiag = 0;
        for (auto [j, k] : kern[i]) {
            if (j == i) continue;
            const double v = k / (t * rowsum);
            trips.emplace_back(i, j, v);
            offdiag += v;
        }
        trips.emplace_back(i, i, -offdiag);
    }
    SparseMatrix M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());

    std::vector<double> line;
    if (dim == 1) {
        line.resize(n);
        for (int i = 0; i < n; ++i) line[i] = points[i](0);
    }
    MetricMeasureSpace space = build_space(std::move(dist), {}, true, {});
    space.line_coords = std::move(line);
    return KernelOperator{make_generator(std::move(M), GeneratorKind::kernel),
                          std::move(space)};
}

int UniformGrid::size() const {
    int s = 1;
    for (int m : shape) s *= m;
    return s;
}

Vector UniformGrid::coordinate(int i) const {
    const int d = dim();
    Vector x(d);
    for (int a = d - 1; a >= 0; --a) {
        x(a) = origin[a] + spacing[a] * (i % shape[a]);
        i /= shape[a];
    }
    return x;
}

UniformGrid make_grid(std::vector<double> origin, std::vector<double> spacing,
                      std::vector<int> shape) {
    const std::size_t d = shape.size();
    if (d < 1 || d > 2)
        fail(ErrorCode::InvalidInput, "only 1D and 2D grids are supported");
    if (origin.size() != d || spacing.size() != d)
        fail(ErrorCode::DimensionMismatch,
             "grid origin/spacing/shape lengths disagree");
    for (std::size_t a = 0; a < d; ++a) {
        if (!(spacing[a] > 0.0))
            fail(ErrorCode::InvalidInput, "grid spacing must be positive");
        if (shape[a] < 3)
            fail(ErrorCode::InvalidInput, "grid needs >= 3 points per axis");
    }
    return UniformGrid{std::move(origin), std::move(spacing),
                       std::move(shape)};
}

UniformGrid grid_from_line(const std::vector<double>& coords) {
    if (coords.size() < 3)
        fail(ErrorCode::InvalidInput, "grid needs >= 3 points per axis");
    const double h = coords[1] - coords[0];
    if (!(h > 0.0))
        fail(ErrorCode::NonuniformGrid, "coordinates must be increasing");
    for (std::size_t i = 2; i < coords.size(); ++i) {
        const double step = coords[i] - coords[i - 1];
        if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
            fail(ErrorCode::NonuniformGrid,
                 "spacing changes at index " + std::to_string(i) + " (" +
                     std::to_string(step) + " vs " + std::to_string(h) + ")");
    }
    return make_grid({coords[0]}, {h}, {static_cast<int>(coords.size())});
}

namespace {

// 3-point stencils along one axis: (position offset within the axis, coeff).
// Central inside, shifted/one-sided at the ends; each row sums to zero.
std::vector<std::pair<int, double>> second_diff(int ia, int m, double h) {
    const double c = 1.0 / (h * h);
    if (ia == 0) return {{0, c}, {1, -2 * c}, {2, c}};
    if (ia == m - 1) return {{m - 3, c}, {m - 2, -2 * c}, {m - 1, c}};
    return {{ia - 1, c}, {ia, -2 * c}, {ia + 1, c}};
}

std::vector<std::pair<int, double>> first_diff(int ia, int m, double h) {
    const double c = 1.0 / (2.0 * h);
    if (ia == 0) return {{0, -3 * c}, {1, 4 * c}, {2, -c}};
    if (ia == m - 1) return {{m - 3, c}, {m - 2, -4 * c}, {m - 1, 3 * c}};
    return {{ia - 1, -c}, {ia + 1, c}};
}

} // namespace

Generator weighted_grid_generator(const UniformGrid& grid,
                                  const WeightField& weight) {
    const int n = grid.size();
    const int d = grid.dim();
    const bool has_rho = weight.rho.size() != 0;
    if (has_rho && weight.rho.size() != n)
        fail(ErrorCode::DimensionMismatch,
             "rho sampled on " + std::to_string(weight.rho.size()) +
                 " points, grid has " + std::to_string(n));
    const bool has_grad = !weight.grad_rho.empty();
    if (has_grad) {
        if (static_cast<int>(weight.grad_rho.size()) != n)
            fail(ErrorCode::DimensionMismatch, "grad rho length != grid size");
        for (const auto& g : weight.grad_rho)
            if (g.size() != d)
                fail(ErrorCode::DimensionMismatch,
                     "grad rho entries must have the grid dimension");
    }

    // index strides for row-major flattening
    std::vector<int> stride(d, 1);
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * grid.shape[a + 1];

    // drift coefficient d rho / d axis at every node
    Matrix drift = Matrix::Zero(n, d);
    if (has_grad) {
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < d; ++a) drift(i, a) = weight.grad_rho[i](a);
    } else if (has_rho) {
        for (int i = 0; i < n; ++i) {
            for (int a = 0; a < d; ++a) {
                const int ia = (i / stride[a]) % grid.shape[a];
                const int base = i - ia * stride[a];
                double s = 0;
                for (auto [pos, coeff] :
                     first_diff(ia, grid.shape[a], grid.spacing[a]))
                    s += coeff * weight.rho(base + pos * stride[a]);
                drift(i, a) = s;
            }
        }
    }

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<std::uint8_t> interior(n, 1);
    for (int i = 0; i < n; ++i) {
        std::map<int, double> row;
        for (int a = 0; a < d; ++a) {
            const int ia = (i / stride[a]) % grid.shape[a];
            const int base = i - ia * stride[a];
            for (auto [pos, coeff] :
                 second_diff(ia, grid.shape[a], grid.spacing[a]))
                row[base + pos * stride[a]] += coeff;
            if (drift(i, a) != 0.0)
                for (auto [pos, coeff] :
                     first_diff(ia, grid.shape[a], grid.spacing[a]))
                    row[base + pos * stride[a]] -= drift(i, a) * coeff;
            if (ia < 2 || ia > grid.shape[a] - 3) interior[i] = 0;
        }
        for (auto [j, v] : row) trips.emplace_back(i, j, v);
    }
    SparseMatrix M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    Generator gen = make_generator(std::move(M), GeneratorKind::grid);
    gen.interior = std::move(interior);
    return gen;
}

MetricMeasureSpace grid_space(const UniformGrid& grid) {
    const int n = grid.size();
    Matrix dist(n, n);
    std::vector<Vector> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = grid.coordinate(i);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dist(i, j) = (xs[i] - xs[j]).norm();
    MetricMeasureSpace space = build_space(std::move(dist), {}, true, {});
    if (grid.dim() == 1) {
        space.line_coords.resize(n);
        for (int i = 0; i < n; ++i) space.line_coords[i] = xs[i](0);
    }
    return space;
}

Matrix semigroup_matrix(const Generator& L, double t) {
    if (!(t >= 0.0))
        fail(ErrorCode::InvalidInput, "semigroup time must be nonnegative");
    if (L.kind == GeneratorKind::custom)
        fail(ErrorCode::NotAGenerator,
             "semigroup needs a Markov, grid, or kernel generator");
    const int n = L.n();
    if (t == 0.0) return Matrix::Identity(n, n);

    Matrix P = (t * Matrix(L.matrix)).exp();
    // Negative entries are roundoff for Markov kinds; grid operators with
    // one-sided boundary stencils can dip slightly further.
    const double floor =
        L.kind == GeneratorKind::markov ? 1e-12 : 1e-8;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (P(i, j) < 0.0) {
                if (P(i, j) < -floor)
                    fail(ErrorCode::NumericFailure,
                         "semigroup entry " + std::to_string(P(i, j)) +
                             " below the clamp floor");
                P(i, j) = 0.0;
            }
    for (int i = 0; i < n; ++i) {
        const double s = P.row(i).sum();
        if (std::abs(s - 1.0) > 1e-6)
            fail(ErrorCode::NumericFailure,
                 "semigroup row " + std::to_string(i) + " sums to " +
                     std::to_string(s));
        P.row(i) /= s;
    }
    return P;
}

StationaryMeasure invariant_measure(const Generator& L) {
    const int n = L.n();
    if (n == 1) return StationaryMeasure{Vector::Ones(1), true, 0.0};

    // Boundary closures of grid operators carry negative off-diagonal
    // entries; those rows are finite-difference artifacts, not jump rates,
    // and the raw transpose null vector oscillates in sign there. Replace
    // each such row by its reversed incoming edges (a reflecting closure).
    // Interior rows are untouched, so stationary mass ratios between
    // interior nodes are those of the original chain.
    const Matrix orig = Matrix(L.matrix);
    Matrix A = orig;
    std::vector<char> defect(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && orig(i, j) < 0.0) defect[i] = 1;
    for (int i = 0; i < n; ++i) {
        if (!defect[i]) continue;
        if (L.is_interior(i))
            fail(ErrorCode::InvalidInput,
                 "negative off-diagonal rate at an interior node");
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            const double in = (j != i && orig(j, i) > 0.0) ? orig(j, i) : 0.0;
            A(i, j) = in;
            total += in;
        }
        if (total <= 0.0)
            fail(ErrorCode::ReducibleChain,
                 "boundary node receives no incoming rate");
        A(i, i) = -total;
    }

    // strong connectivity of the positive off-diagonal support
    std::vector<std::vector<int>> fwd(n), bwd(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i && A(i, j) > 0.0) {
                fwd[i].push_back(j);
                bwd[j].push_back(i);
            }
    for (const auto* adj : {&fwd, &bwd}) {
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int count = 1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : (*adj)[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    q.push(v);
                }
        }
        if (count != n)
            fail(ErrorCode::ReducibleChain,
                 "generator support is not strongly connected");
    }

    Matrix M = A.transpose();
    M.row(n - 1).setOnes();
    Vector b = Vector::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible())
        fail(ErrorCode::ReducibleChain, "stationary vector is not unique");
    Vector mu = lu.solve(b);
    for (int pass = 0; pass < 3; ++pass) mu += lu.solve(b - M * mu);

    if (mu.minCoeff() < -1e-10 * mu.cwiseAbs().maxCoeff())
        fail(ErrorCode::NumericFailure,
             "stationary vector has negative mass");
    mu = mu.cwiseMax(0.0);
    mu /= mu.sum();

    const Vector res = A.transpose() * mu;
    const double residual = res.cwiseAbs().maxCoeff();
    if (residual > 1e-10)
        fail(ErrorCode::NumericFailure,
             "stationary residual " + std::to_string(residual));

    double scale = 0, bal = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double fij = mu(i) * A(i, j);
            scale = std::max(scale, std::abs(fij));
            bal = std::max(bal, std::abs(fij - mu(j) * A(j, i)));
        }
    const bool balanced = bal <= 1e-10 * std::max(scale, 1e-300);
    return StationaryMeasure{std::move(mu), balanced, residual};
}

} // namespace cricci
