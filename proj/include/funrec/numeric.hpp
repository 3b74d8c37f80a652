#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

namespace funrec {

// Shortest decimal string that parses back to exactly the same double.
// Used for every number we persist, so reruns are byte-identical.
std::string format_double(double v);

std::uint64_t splitmix64(std::uint64_t x);

// Seed for (stream, index) derived from a master seed. Distinct inputs give
// distinct outputs for all practical purposes; callers that must guarantee
// distinctness check the derived set explicitly.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

// FNV-1a over a byte range, used for config and grid fingerprints.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ull);

// Neumaier-compensated accumulator. Keeps result aggregation insensitive to
// the order replication workers complete in.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // ddof = 1
double sample_covariance(std::span<const double> xs, std::span<const double> ys);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares of y on x.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace funrec
