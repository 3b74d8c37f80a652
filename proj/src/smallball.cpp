#include "funrec/smallball.hpp"

#include <algorithm>
#include <cmath>

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"

namespace funrec {

SmallBallModel SmallBallModel::power_law(double c, double gamma, double valid_up_to) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw ValidationError("SmallBallModel: C must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ValidationError("SmallBallModel: gamma must be positive");
    if (!(valid_up_to > 0.0)) throw ValidationError("SmallBallModel: validity radius must be positive");
    SmallBallModel m(SmallBallKind::PowerLaw);
    m.c_ = c;
    m.gamma_ = gamma;
    m.valid_up_to_ = valid_up_to;
    return m;
}

SmallBallModel SmallBallModel::empirical(std::vector<double> pilot_distances) {
    if (pilot_distances.empty()) throw ValidationError("SmallBallModel: empty pilot sample");
    for (double d : pilot_distances) {
        if (!std::isfinite(d) || d < 0.0)
            throw ValidationError("SmallBallModel: distances must be finite and nonnegative");
    }
    std::sort(pilot_distances.begin(), pilot_distances.end());
    SmallBallModel m(SmallBallKind::Empirical);
    m.distances_ = std::move(pilot_distances);
    return m;
}

double SmallBallModel::operator()(double h) const {
    if (h < 0.0) throw DomainError("small-ball: negative radius");
    switch (kind_) {
        case SmallBallKind::PowerLaw: {
            if (h > valid_up_to_)
                throw DomainError("small-ball: radius " + format_double(h) +
                                  " beyond the model's validity radius " +
                                  format_double(valid_up_to_));
            return std::min(c_ * std::pow(h, gamma_), 1.0);
        }
        case SmallBallKind::Empirical: {
            const auto it = std::upper_bound(distances_.begin(), distances_.end(), h);
            return static_cast<double>(it - distances_.begin()) /
                   static_cast<double>(distances_.size());
        }
    }
    throw ValidationError("SmallBallModel: unknown kind");
}

std::string SmallBallModel::to_json_string() const {
    if (kind_ == SmallBallKind::PowerLaw) {
        return std::string("{\"kind\":\"power_law\",\"C\":") + format_double(c_) +
               ",\"gamma\":" + format_double(gamma_) + "}";
    }
    return std::string("{\"kind\":\"empirical\",\"n_pilot\":") +
           std::to_string(distances_.size()) + "}";
}

PowerLawFit fit_powerlaw(std::span<const double> distances, double q_lo, double q_hi) {
    if (distances.size() < 50) throw FitError("fit_powerlaw: need at least 50 distances");
    if (!(q_lo > 0.0 && q_lo < q_hi && q_hi < 1.0))
        throw FitError("fit_powerlaw: quantile range must satisfy 0 < lo < hi < 1");

    std::vector<double> sorted(distances.begin(), distances.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    const std::size_t k_lo = static_cast<std::size_t>(std::ceil(q_lo * n));
    const std::size_t k_hi = static_cast<std::size_t>(std::floor(q_hi * n));

    std::vector<double> log_h, log_f;
    for (std::size_t k = std::max<std::size_t>(k_lo, 1); k <= k_hi && k <= sorted.size(); ++k) {
        const double d = sorted[k - 1];  // k-th order statistic, F_hat = k/n
        if (d <= 0.0) continue;
        log_h.push_back(std::log(d));
        log_f.push_back(std::log(static_cast<double>(k) / n));
    }
    if (log_h.size() < 2) throw FitError("fit_powerlaw: too few usable distances in the band");

    LineFit fit;
    try {
        fit = fit_line(log_h, log_f);
    } catch (const FitError&) {
        throw FitError("fit_powerlaw: degenerate distance sample");
    }
    if (!(fit.slope > 0.0))
        throw FitError("fit_powerlaw: fitted exponent is not positive");
    return {std::exp(fit.intercept), fit.slope};
}

SmallBallModel scalar_reference_model(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw DomainError("scalar_reference_model: query point must be interior to (0, 1)");
    return SmallBallModel::power_law(2.0, 1.0, std::min(u, 1.0 - u));
}

}  // namespace funrec
