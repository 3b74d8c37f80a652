#include "funrec/curve.hpp"

#include <cmath>

#include "funrec/errors.hpp"

namespace funrec {

Curve::Curve(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ValidationError("Curve: null grid");
    if (values_.size() != grid_->size())
        throw StructuralError("Curve: value count does not match grid length");
    for (double v : values_) {
        if (!std::isfinite(v)) throw ValidationError("Curve: non-finite value");
    }
}

Curve Curve::constant(GridPtr grid, double level) {
    if (!grid) throw ValidationError("Curve::constant: null grid");
    return Curve(grid, std::vector<double>(grid->size(), level));
}

Curve Curve::linear(GridPtr grid, double value_at0, double value_at1) {
    if (!grid) throw ValidationError("Curve::linear: null grid");
    std::vector<double> vals(grid->size());
    for (std::size_t k = 0; k < vals.size(); ++k) {
        vals[k] = value_at0 + (value_at1 - value_at0) * grid->points()[k];
    }
    return Curve(std::move(grid), std::move(vals));
}

void require_same_grid(const Curve& a, const Curve& b) {
    if (!a.grid()->compatible_with(*b.grid()))
        throw StructuralError("curves live on different grids");
}

}  // namespace funrec
