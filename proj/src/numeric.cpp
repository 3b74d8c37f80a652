#include "funrec/numeric.hpp"

#include <array>
#include <charconv>

#include "funrec/errors.hpp"

namespace funrec {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t s = splitmix64(master ^ (0xa0761d6478bd642full * (stream + 1)));
    return splitmix64(s + 0x9e3779b97f4a7c15ull * (index + 1));
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean: empty sample");
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw DomainError("sample_variance: need at least two values");
    const double m = mean(xs);
    CompensatedSum s;
    for (double x : xs) s.add((x - m) * (x - m));
    return s.value() / static_cast<double>(xs.size() - 1);
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw StructuralError("sample_covariance: length mismatch");
    if (xs.size() < 2) throw DomainError("sample_covariance: need at least two values");
    const double mx = mean(xs);
    const double my = mean(ys);
    CompensatedSum s;
    for (std::size_t i = 0; i < xs.size(); ++i) s.add((xs[i] - mx) * (ys[i] - my));
    return s.value() / static_cast<double>(xs.size() - 1);
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw StructuralError("fit_line: length mismatch");
    if (xs.size() < 2) throw FitError("fit_line: need at least two points");
    const double mx = mean(xs);
    const double my = mean(ys);
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx.add((xs[i] - mx) * (xs[i] - mx));
        sxy.add((xs[i] - mx) * (ys[i] - my));
    }
    if (sxx.value() <= 0.0) throw FitError("fit_line: abscissae are degenerate");
    LineFit f;
    f.slope = sxy.value() / sxx.value();
    f.intercept = my - f.slope * mx;
    return f;
}

}  // namespace funrec
