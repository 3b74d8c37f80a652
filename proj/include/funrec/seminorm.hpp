#pragma once

#include <string>

#include "funrec/curve.hpp"

namespace funrec {

enum class SemiNormKind { L2, Sup, DerivL2 };

// Semi-norms on curves. DerivL2 measures the L2 norm of the first difference
// quotient and vanishes on constants, which makes it a genuine semi-norm
// rather than a norm.
struct SemiNorm {
    SemiNormKind kind = SemiNormKind::L2;

    double norm(const Curve& x) const;
    double distance(const Curve& a, const Curve& b) const;
};

double seminorm_dist(const Curve& a, const Curve& b, const SemiNorm& s);

const char* to_string(SemiNormKind kind);
SemiNormKind seminorm_kind_from_string(const std::string& name);

}  // namespace funrec
