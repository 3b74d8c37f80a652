#pragma once

#include <cstdint>
#include <random>

namespace funrec {

// Deterministic generator used wherever randomness is needed. The engine is
// mt19937_64 (bit-specified by the standard) and the uniform/gaussian
// transforms are implemented here instead of via std distributions, whose
// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian();

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace funrec
