#pragma once

#include <cmath>
#include <cstddef>

namespace funrec {

// Power-law bandwidth sequence h_i = h1 * i^{-decay}. decay = 0 yields the
// constant schedule, a degenerate case kept for invariance checks; positive
// decay gives the strictly decreasing sequences the asymptotics assume.
class BandwidthSchedule {
public:
    BandwidthSchedule(double h1, double decay);

    double h(std::size_t i) const {
        if (decay_ == 0.0) return h1_;
        return h1_ * std::pow(static_cast<double>(i), -decay_);
    }

    double h1() const { return h1_; }
    double decay() const { return decay_; }

private:
    double h1_;
    double decay_;
};

}  // namespace funrec
