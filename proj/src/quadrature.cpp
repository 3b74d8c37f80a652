#include "funrec/quadrature.hpp"

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"

namespace funrec {

double integrate(std::span<const double> values, const Grid& grid) {
    if (values.size() != grid.size())
        throw StructuralError("integrate: tabulation does not match grid length");
    CompensatedSum acc;
    for (std::size_t k = 0; k < values.size(); ++k) acc.add(grid.weights()[k] * values[k]);
    return acc.value();
}

double integrate(const std::function<double(double)>& f, const Grid& grid) {
    CompensatedSum acc;
    for (std::size_t k = 0; k < grid.size(); ++k)
        acc.add(grid.weights()[k] * f(grid.points()[k]));
    return acc.value();
}

double integrate_fine(const std::function<double(double)>& f) {
    const std::size_t n = kFinePanels;  // even
    const double h = 1.0 / static_cast<double>(n);
    CompensatedSum acc;
    acc.add(f(0.0));
    acc.add(f(1.0));
    for (std::size_t k = 1; k < n; ++k) {
        const double s = static_cast<double>(k) * h;
        acc.add((k % 2 == 1 ? 4.0 : 2.0) * f(s));
    }
    return acc.value() * h / 3.0;
}

namespace {

double midpoint_stieltjes(const std::function<double(double)>& f,
                          const std::function<double(double)>& tau, std::size_t panels) {
    CompensatedSum acc;
    double tau_prev = tau(0.0);
    for (std::size_t k = 0; k < panels; ++k) {
        const double s_hi = static_cast<double>(k + 1) / static_cast<double>(panels);
        const double s_mid = (static_cast<double>(k) + 0.5) / static_cast<double>(panels);
        const double tau_hi = tau(s_hi);
        acc.add(f(s_mid) * (tau_hi - tau_prev));
        tau_prev = tau_hi;
    }
    return acc.value();
}

}  // namespace

double integrate_stieltjes(const std::function<double(double)>& f,
                           const std::function<double(double)>& tau) {
    const double coarse = midpoint_stieltjes(f, tau, kFinePanels / 2);
    const double fine = midpoint_stieltjes(f, tau, kFinePanels);
    // Midpoint error is O(h^2); one extrapolation step removes that term.
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace funrec
