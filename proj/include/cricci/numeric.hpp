#pragma once

#include <cstddef>
#include <vector>

#include "cricci/errors.hpp"

namespace cricci {

inline double least_squares_slope(const std::vector<double>& x,
                                  const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2)
        fail(ErrorCode::InvalidInput, "slope fit needs >= 2 samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0, var = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        var += (x[i] - mx) * (x[i] - mx);
    }
    if (var == 0.0)
        fail(ErrorCode::InvalidInput, "slope fit needs distinct abscissae");
    return cov / var;
}

} // namespace cricci
