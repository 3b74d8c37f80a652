#include "funrec/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "funrec/errors.hpp"

namespace funrec {

Kernel Kernel::uniform() { return Kernel(KernelKind::Uniform); }
Kernel Kernel::triangle() { return Kernel(KernelKind::Triangle); }
Kernel Kernel::quadratic() { return Kernel(KernelKind::Quadratic); }

Kernel Kernel::custom(std::vector<double> abscissae, std::vector<double> values) {
    if (abscissae.size() != values.size() || abscissae.size() < 2)
        throw ValidationError("Kernel::custom: need matching tables with at least two entries");
    if (abscissae.front() != 0.0 || abscissae.back() != 1.0)
        throw ValidationError("Kernel::custom: table must cover [0, 1] exactly");
    for (std::size_t k = 1; k < abscissae.size(); ++k) {
        if (!(abscissae[k] > abscissae[k - 1]))
            throw ValidationError("Kernel::custom: abscissae must be strictly increasing");
    }
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("Kernel::custom: values must be finite and nonnegative");
    }
    Kernel k(KernelKind::Custom);
    k.abscissae_ = std::move(abscissae);
    k.values_ = std::move(values);
    return k;
}

double Kernel::operator()(double t) const {
    if (t < 0.0) throw DomainError("kernel: negative argument");
    if (t > 1.0) return 0.0;
    switch (kind_) {
        case KernelKind::Uniform: return 1.0;
        case KernelKind::Triangle: return 1.0 - t;
        case KernelKind::Quadratic: return 1.5 * (1.0 - t * t);
        case KernelKind::Custom: {
            const auto it = std::upper_bound(abscissae_.begin(), abscissae_.end(), t);
            if (it == abscissae_.begin()) return values_.front();
            if (it == abscissae_.end()) return values_.back();
            const std::size_t hi = static_cast<std::size_t>(it - abscissae_.begin());
            const std::size_t lo = hi - 1;
            const double w = (t - abscissae_[lo]) / (abscissae_[hi] - abscissae_[lo]);
            return values_[lo] + w * (values_[hi] - values_[lo]);
        }
    }
    throw ValidationError("Kernel: unknown kind");
}

double Kernel::derivative(double t) const {
    if (!has_derivative()) throw DomainError("kernel: tabulated kernel has no analytic derivative");
    if (t < 0.0 || t > 1.0) throw DomainError("kernel derivative: argument outside [0, 1]");
    switch (kind_) {
        case KernelKind::Uniform: return 0.0;
        case KernelKind::Triangle: return -1.0;
        case KernelKind::Quadratic: return -3.0 * t;
        default: break;
    }
    throw ValidationError("Kernel: unknown kind");
}

double Kernel::at_zero() const { return (*this)(0.0); }

double Kernel::at_one() const { return (*this)(1.0); }

double Kernel::infimum() const {
    switch (kind_) {
        case KernelKind::Uniform: return 1.0;
        case KernelKind::Triangle: return 0.0;
        case KernelKind::Quadratic: return 0.0;
        case KernelKind::Custom: return *std::min_element(values_.begin(), values_.end());
    }
    throw ValidationError("Kernel: unknown kind");
}

double Kernel::supremum() const {
    switch (kind_) {
        case KernelKind::Uniform: return 1.0;
        case KernelKind::Triangle: return 1.0;
        case KernelKind::Quadratic: return 1.5;
        case KernelKind::Custom: return *std::max_element(values_.begin(), values_.end());
    }
    throw ValidationError("Kernel: unknown kind");
}

const char* to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Uniform: return "uniform";
        case KernelKind::Triangle: return "triangle";
        case KernelKind::Quadratic: return "quadratic";
        case KernelKind::Custom: return "custom";
    }
    return "?";
}

}  // namespace funrec
