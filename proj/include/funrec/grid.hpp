#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace funrec {

// Sampling grid on a subinterval of [0, 1], shared by every curve of a
// dataset. Quadrature weights are trapezoid weights derived from the
// abscissae; they sum to the span of the grid.
class Grid {
public:
    // Points must be strictly increasing with first >= 0 and last <= 1.
    explicit Grid(std::vector<double> points);

    static std::shared_ptr<const Grid> uniform(std::size_t n_points, double lo = 0.0,
                                               double hi = 1.0);
    static std::shared_ptr<const Grid> make(std::vector<double> points);

    const std::vector<double>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return points_.size(); }
    double span() const { return points_.back() - points_.front(); }
    std::uint64_t fingerprint() const { return fingerprint_; }

    // Same object or same abscissae. Curves on incompatible grids never mix.
    bool compatible_with(const Grid& other) const;

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    std::uint64_t fingerprint_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace funrec
