#include "funrec/grid.hpp"

#include <cmath>

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"

namespace funrec {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw ValidationError("Grid: need at least two points");
    for (double p : points_) {
        if (!std::isfinite(p)) throw ValidationError("Grid: non-finite abscissa");
    }
    if (points_.front() < 0.0 || points_.back() > 1.0)
        throw ValidationError("Grid: abscissae must lie in [0, 1]");
    for (std::size_t k = 1; k < points_.size(); ++k) {
        if (!(points_[k] > points_[k - 1]))
            throw ValidationError("Grid: abscissae must be strictly increasing");
    }

    const std::size_t m = points_.size();
    weights_.assign(m, 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double half = 0.5 * (points_[k + 1] - points_[k]);
        weights_[k] += half;
        weights_[k + 1] += half;
    }

    fingerprint_ = fnv1a(points_.data(), points_.size() * sizeof(double));
}

std::shared_ptr<const Grid> Grid::uniform(std::size_t n_points, double lo, double hi) {
    if (n_points < 2) throw ValidationError("Grid::uniform: need at least two points");
    if (!(lo < hi)) throw ValidationError("Grid::uniform: lo must be below hi");
    std::vector<double> pts(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        pts[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_points - 1);
    }
    pts.back() = hi;
    return std::make_shared<const Grid>(std::move(pts));
}

std::shared_ptr<const Grid> Grid::make(std::vector<double> points) {
    return std::make_shared<const Grid>(std::move(points));
}

bool Grid::compatible_with(const Grid& other) const {
    if (this == &other) return true;
    return size() == other.size() && fingerprint_ == other.fingerprint_;
}

}  // namespace funrec
