#pragma once

// Straight-line reference implementations used to cross-check the library.
// Everything here works on dense matrices with explicit loops and no calls
// into the main code paths.

#include <Eigen/Dense>

namespace brute {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Vec apply(const Mat& L, const Vec& f) {
    const int n = static_cast<int>(L.rows());
    Vec out(n);
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += L(i, j) * f(j);
        out(i) = s;
    }
    return out;
}

inline Vec gamma(const Mat& L, const Vec& u, const Vec& v) {
    const int n = static_cast<int>(L.rows());
    Vec uv(n);
    for (int i = 0; i < n; ++i) uv(i) = u(i) * v(i);
    const Vec Luv = apply(L, uv);
    const Vec Lu = apply(L, u);
    const Vec Lv = apply(L, v);
    Vec out(n);
    for (int i = 0; i < n; ++i)
        out(i) = 0.5 * (Luv(i) - Lu(i) * v(i) - u(i) * Lv(i));
    return out;
}

inline Vec gamma2(const Mat& L, const Vec& u, const Vec& v) {
    const Vec g = gamma(L, u, v);
    const Vec Lg = apply(L, g);
    const Vec Lu = apply(L, u);
    const Vec Lv = apply(L, v);
    const Vec a = gamma(L, Lu, v);
    const Vec b = gamma(L, u, Lv);
    const int n = static_cast<int>(L.rows());
    Vec out(n);
    for (int i = 0; i < n; ++i) out(i) = 0.5 * Lg(i) - 0.5 * (a(i) + b(i));
    return out;
}

// f_{x,y}(z) = (d(x,y)^2 - d(y,z)^2 + d(z,x)^2) / 2
inline Vec pair_function(const Mat& d, int x, int y) {
    const int n = static_cast<int>(d.rows());
    Vec f(n);
    for (int z = 0; z < n; ++z)
        f(z) = 0.5 * (d(x, y) * d(x, y) - d(y, z) * d(y, z) +
                      d(z, x) * d(z, x));
    return f;
}

inline double coarse_ricci(const Mat& L, const Mat& d, int x, int y) {
    const Vec f = pair_function(d, x, y);
    return gamma2(L, f, f)(x);
}

} // namespace brute
