#pragma once

#include <functional>
#include <span>

#include "funrec/grid.hpp"

namespace funrec {

// Trapezoid rule on a dataset grid. This is the default rule for everything
// that touches observed curves.
double integrate(std::span<const double> values, const Grid& grid);
double integrate(const std::function<double(double)>& f, const Grid& grid);

// Dedicated fine rule for asymptotic constants: composite Simpson on a
// 2001-point uniform grid over [0, 1], independent of any data grid.
inline constexpr std::size_t kFinePanels = 2000;
double integrate_fine(const std::function<double(double)>& f);

// Stieltjes integral of f against a nondecreasing tau on [0, 1], evaluated by
// midpoint sums on the fine grid with one Richardson extrapolation step. No
// derivative of tau is ever taken, so tabulated tau works too.
double integrate_stieltjes(const std::function<double(double)>& f,
                           const std::function<double(double)>& tau);

}  // namespace funrec
