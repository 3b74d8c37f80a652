#pragma once

#include <cmath>
#include <vector>

#include "funrec/curve.hpp"
#include "funrec/rng.hpp"

namespace funrec::testing {

inline Curve random_curve(GridPtr grid, Rng& rng, double scale = 1.0) {
    std::vector<double> vals(grid->size());
    for (auto& v : vals) v = scale * (2.0 * rng.uniform01() - 1.0);
    return Curve(std::move(grid), std::move(vals));
}

inline double rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / denom;
}

}  // namespace funrec::testing
