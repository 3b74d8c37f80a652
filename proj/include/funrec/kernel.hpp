#pragma once

#include <string>
#include <vector>

namespace funrec {

enum class KernelKind { Uniform, Triangle, Quadratic, Custom };

// Kernel on [0, 1]: nonnegative, bounded, identically zero past 1. Custom
// kernels are tabulated and evaluated by linear interpolation; they expose no
// analytic derivative, so their moment constants go through the
// differentiation-free route in asymconst.
class Kernel {
public:
    static Kernel uniform();    // K = 1 on [0, 1]
    static Kernel triangle();   // K(t) = 1 - t
    static Kernel quadratic();  // K(t) = (3/2)(1 - t^2)
    // Table covering [0, 1] with abscissae strictly increasing from 0 to 1.
    static Kernel custom(std::vector<double> abscissae, std::vector<double> values);

    // Evaluate at t >= 0; negative t is a DomainError.
    double operator()(double t) const;

    bool has_derivative() const { return kind_ != KernelKind::Custom; }
    double derivative(double t) const;  // analytic kinds, t in [0, 1]

    double at_zero() const;
    double at_one() const;
    double infimum() const;  // inf over [0, 1]
    double supremum() const;

    KernelKind kind() const { return kind_; }
    const std::vector<double>& table_abscissae() const { return abscissae_; }
    const std::vector<double>& table_values() const { return values_; }

private:
    explicit Kernel(KernelKind kind) : kind_(kind) {}

    KernelKind kind_;
    std::vector<double> abscissae_;
    std::vector<double> values_;
};

const char* to_string(KernelKind kind);

}  // namespace funrec
