#pragma once

#include <vector>

#include "funrec/grid.hpp"

namespace funrec {

// A real-valued function tabulated on a shared grid. Immutable after
// construction.
class Curve {
public:
    Curve(GridPtr grid, std::vector<double> values);

    const GridPtr& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    static Curve constant(GridPtr grid, double level);
    // value_at0 + (value_at1 - value_at0) * s
    static Curve linear(GridPtr grid, double value_at0, double value_at1);

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// Throws StructuralError unless both curves live on compatible grids.
void require_same_grid(const Curve& a, const Curve& b);

}  // namespace funrec
