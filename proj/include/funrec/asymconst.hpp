#pragma once

#include <span>
#include <utility>
#include <vector>

#include "funrec/bandwidth.hpp"
#include "funrec/kernel.hpp"

namespace funrec {

// Limit shape of the small-ball ratio: tau0(s) = lim_{h -> 0} phi(hs)/phi(h).
// The power-law family gives tau0(s) = s^gamma; custom tables are piecewise
// linear, nondecreasing, with tau0(0) = 0 and tau0(1) = 1.
class TauModel {
public:
    static TauModel power_law(double gamma);
    static TauModel custom(std::vector<double> s, std::vector<double> tau);

    double operator()(double s) const;
    bool is_power_law() const { return power_law_; }
    double gamma() const;

private:
    TauModel() = default;

    bool power_law_ = false;
    double gamma_ = 0.0;
    std::vector<double> s_;
    std::vector<double> tau_;
};

// Kernel moment constants against tau0.
struct MConstants {
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
};

// Direct quadrature of the defining integrands; needs an analytic kernel
// derivative.
MConstants m_constants_direct(const Kernel& kernel, const TauModel& tau);
// Integration-by-parts form: Stieltjes integrals of sK, K, K^2 against tau0.
// Works for tabulated kernels, no differentiation anywhere.
MConstants m_constants_stieltjes(const Kernel& kernel, const TauModel& tau);
// Dispatches to the direct route for analytic kernels, the Stieltjes route
// otherwise. The two routes agree to ~1e-8 for analytic kernels.
MConstants m_constants(const Kernel& kernel, const TauModel& tau);

struct SeqValue {
    double value = 0.0;
    bool convergent = true;  // false when the defining sum has no finite limit
};

struct FiniteSequences {
    SeqValue a_n;                                   // A_{n, ell}
    std::vector<std::pair<double, SeqValue>> b_n;   // (r, B_{n, r})
};

// Exact finite-n Cesaro sums under phi(h) = h^gamma. Divergent configurations
// are flagged but their finite-n value is still returned.
FiniteSequences finite_sequences(const BandwidthSchedule& sched, double tau_gamma, std::size_t n,
                                 double ell, std::span<const double> r_list);

// Closed-form limits. Throw DivergenceError naming the violated inequality.
double alpha_limit(const BandwidthSchedule& sched, double tau_gamma, double ell);
double beta_limit(const BandwidthSchedule& sched, double tau_gamma, double r);

// Everything the theoretical predictors need, assembled once per
// configuration. beta(r) is a lookup of pre-computed limits.
struct AsymptoticConstants {
    double ell = 0.0;
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double alpha_ell = 0.0;
    double beta_one_minus_ell = 0.0;
    double beta_one_minus_two_ell = 0.0;
    std::vector<std::pair<double, double>> beta_table;

    double beta(double r) const;
};

AsymptoticConstants asymptotic_constants(const Kernel& kernel, const TauModel& tau,
                                         const BandwidthSchedule& sched, double ell,
                                         std::span<const double> extra_r = {});

// Variance constant of the almost-sure bound.
double v_ell(const AsymptoticConstants& c, double sigma2_eps, double f1);

// Leading-order bias at bandwidth h_n.
double predict_bias(const AsymptoticConstants& c, double zeta_prime, double h_n);

struct SecondOrderPrediction {
    double var_fn = 0.0;
    double var_phin = 0.0;
    double cov_n = 0.0;
};

// Leading-order variances and covariance of the two estimator components.
SecondOrderPrediction predict_second_order(const AsymptoticConstants& c, double r_chi,
                                           double sigma2_eps, double f1, double n,
                                           double phi_hn);

// Leading-order mean square error: squared bias plus the variance term.
double predict_mse(const AsymptoticConstants& c, double zeta_prime, double sigma2_eps, double f1,
                   double n, double h_n, double phi_hn);

struct TheoryPrediction {
    double bias_n = 0.0;
    double var_fn = 0.0;
    double var_phin = 0.0;
    double cov_n = 0.0;
    double mse_n = 0.0;
    double as_bound = 0.0;
};

TheoryPrediction predict_all(const AsymptoticConstants& c, double zeta_prime, double r_chi,
                             double sigma2_eps, double f1, double n, double h_n, double phi_hn);

}  // namespace funrec
