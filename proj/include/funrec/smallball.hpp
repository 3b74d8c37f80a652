#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace funrec {

enum class SmallBallKind { PowerLaw, Empirical };

// Small-ball probability F(h) = P[ ||chi - X|| <= h ]. The power-law variant
// is F(h) = C * h^gamma capped at 1; the empirical variant is the step CDF of
// a vector of pilot distances.
//
// A power-law model may carry a validity radius: the reference models used
// for verification are exact only up to a boundary distance and refuse to be
// evaluated past it.
class SmallBallModel {
public:
    static SmallBallModel power_law(double c, double gamma,
                                    double valid_up_to = std::numeric_limits<double>::infinity());
    static SmallBallModel empirical(std::vector<double> pilot_distances);

    // F(h). h < 0 is a DomainError, as is h beyond the validity radius.
    double operator()(double h) const;

    SmallBallKind kind() const { return kind_; }
    double c() const { return c_; }
    double gamma() const { return gamma_; }
    double valid_up_to() const { return valid_up_to_; }
    const std::vector<double>& pilot_distances() const { return distances_; }

    // {"kind": ..., "C": ..., "gamma": ...} for power-law models.
    std::string to_json_string() const;

private:
    explicit SmallBallModel(SmallBallKind kind) : kind_(kind) {}

    SmallBallKind kind_;
    double c_ = 0.0;
    double gamma_ = 0.0;
    double valid_up_to_ = std::numeric_limits<double>::infinity();
    std::vector<double> distances_;  // sorted
};

struct PowerLawFit {
    double c = 0.0;
    double gamma = 0.0;
};

// Least-squares fit of log F_hat(h) = log C + gamma log h over the empirical
// quantile band (q_lo, q_hi) of the distance sample.
PowerLawFit fit_powerlaw(std::span<const double> distances, double q_lo, double q_hi);

// Exact small-ball model for a scalar covariate uniform on [0, 1] observed at
// an interior point u under absolute distance: F(h) = 2h for h <= min(u, 1-u).
SmallBallModel scalar_reference_model(double u);

}  // namespace funrec
