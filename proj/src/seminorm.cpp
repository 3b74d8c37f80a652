#include "funrec/seminorm.hpp"

#include <cmath>

#include "funrec/errors.hpp"

namespace funrec {

namespace {

template <typename ValueAt>
double eval(SemiNormKind kind, const Grid& g, ValueAt v) {
    const std::size_t m = g.size();
    switch (kind) {
        case SemiNormKind::L2: {
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double x = v(k);
                acc += g.weights()[k] * x * x;
            }
            return std::sqrt(acc);
        }
        case SemiNormKind::Sup: {
            double acc = 0.0;
            for (std::size_t k = 0; k < m; ++k) acc = std::max(acc, std::abs(v(k)));
            return acc;
        }
        case SemiNormKind::DerivL2: {
            double acc = 0.0;
            for (std::size_t k = 0; k + 1 < m; ++k) {
                const double dt = g.points()[k + 1] - g.points()[k];
                const double slope = (v(k + 1) - v(k)) / dt;
                acc += dt * slope * slope;
            }
            return std::sqrt(acc);
        }
    }
    throw ValidationError("SemiNorm: unknown kind");
}

}  // namespace

double SemiNorm::norm(const Curve& x) const {
    return eval(kind, *x.grid(), [&](std::size_t k) { return x[k]; });
}

double SemiNorm::distance(const Curve& a, const Curve& b) const {
    require_same_grid(a, b);
    return eval(kind, *a.grid(), [&](std::size_t k) { return a[k] - b[k]; });
}

double seminorm_dist(const Curve& a, const Curve& b, const SemiNorm& s) {
    return s.distance(a, b);
}

const char* to_string(SemiNormKind kind) {
    switch (kind) {
        case SemiNormKind::L2: return "l2";
        case SemiNormKind::Sup: return "sup";
        case SemiNormKind::DerivL2: return "deriv_l2";
    }
    return "?";
}

SemiNormKind seminorm_kind_from_string(const std::string& name) {
    if (name == "l2") return SemiNormKind::L2;
    if (name == "sup") return SemiNormKind::Sup;
    if (name == "deriv_l2") return SemiNormKind::DerivL2;
    throw ValidationError("unknown semi-norm kind: " + name);
}

}  // namespace funrec
