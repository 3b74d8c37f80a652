#include "funrec/bandwidth.hpp"

#include "funrec/errors.hpp"

namespace funrec {

BandwidthSchedule::BandwidthSchedule(double h1, double decay) : h1_(h1), decay_(decay) {
    if (!(h1 > 0.0) || !std::isfinite(h1))
        throw ValidationError("BandwidthSchedule: h1 must be positive");
    if (!(decay >= 0.0) || !(decay < 1.0))
        throw ValidationError("BandwidthSchedule: decay exponent must lie in [0, 1)");
}

}  // namespace funrec
