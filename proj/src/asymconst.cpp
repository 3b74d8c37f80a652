#include "funrec/asymconst.hpp"

#include <algorithm>
#include <cmath>

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"
#include "funrec/quadrature.hpp"

namespace funrec {

TauModel TauModel::power_law(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ValidationError("TauModel: gamma must be positive");
    TauModel t;
    t.power_law_ = true;
    t.gamma_ = gamma;
    return t;
}

TauModel TauModel::custom(std::vector<double> s, std::vector<double> tau) {
    if (s.size() != tau.size() || s.size() < 2)
        throw ValidationError("TauModel: need matching tables with at least two entries");
    if (s.front() != 0.0 || s.back() != 1.0)
        throw ValidationError("TauModel: table must cover [0, 1] exactly");
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (!(s[k] > s[k - 1]))
            throw ValidationError("TauModel: abscissae must be strictly increasing");
        if (tau[k] < tau[k - 1])
            throw ValidationError("TauModel: tau0 must be nondecreasing");
    }
    if (std::abs(tau.front()) > 1e-12 || std::abs(tau.back() - 1.0) > 1e-12)
        throw ValidationError("TauModel: tau0 must satisfy tau0(0) = 0 and tau0(1) = 1");
    TauModel t;
    t.s_ = std::move(s);
    t.tau_ = std::move(tau);
    return t;
}

double TauModel::operator()(double s) const {
    if (s < 0.0 || s > 1.0) throw DomainError("tau0: argument outside [0, 1]");
    if (power_law_) return std::pow(s, gamma_);
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    if (it == s_.begin()) return tau_.front();
    if (it == s_.end()) return tau_.back();
    const std::size_t hi = static_cast<std::size_t>(it - s_.begin());
    const std::size_t lo = hi - 1;
    const double w = (s - s_[lo]) / (s_[hi] - s_[lo]);
    return tau_[lo] + w * (tau_[hi] - tau_[lo]);
}

double TauModel::gamma() const {
    if (!power_law_) throw DomainError("TauModel: custom table has no exponent");
    return gamma_;
}

MConstants m_constants_direct(const Kernel& kernel, const TauModel& tau) {
    if (!kernel.has_derivative())
        throw DomainError("m_constants_direct: kernel has no analytic derivative");
    const auto t0 = [&tau](double s) { return tau(s); };
    const double i0 =
        integrate_fine([&](double s) { return (kernel(s) + s * kernel.derivative(s)) * t0(s); });
    const double i1 = integrate_fine([&](double s) { return kernel.derivative(s) * t0(s); });
    const double i2 =
        integrate_fine([&](double s) { return 2.0 * kernel(s) * kernel.derivative(s) * t0(s); });
    MConstants m;
    m.m0 = kernel.at_one() - i0;
    m.m1 = kernel.at_one() - i1;
    m.m2 = kernel.at_one() * kernel.at_one() - i2;
    return m;
}

MConstants m_constants_stieltjes(const Kernel& kernel, const TauModel& tau) {
    // Integration by parts against tau0; the boundary terms vanish because
    // tau0(0) = 0 and tau0(1) = 1.
    const auto t0 = [&tau](double s) { return tau(s); };
    MConstants m;
    m.m0 = integrate_stieltjes([&](double s) { return s * kernel(s); }, t0);
    m.m1 = integrate_stieltjes([&](double s) { return kernel(s); }, t0);
    m.m2 = integrate_stieltjes([&](double s) { return kernel(s) * kernel(s); }, t0);
    return m;
}

MConstants m_constants(const Kernel& kernel, const TauModel& tau) {
    return kernel.has_derivative() ? m_constants_direct(kernel, tau)
                                   : m_constants_stieltjes(kernel, tau);
}

namespace {

// A_{n,ell} and B_{n,r} collapse to (1/n) sum (n/i)^p under phi(h) = h^gamma.
double cesaro_power_sum(std::size_t n, double p) {
    CompensatedSum acc;
    const double nd = static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        acc.add(std::pow(nd / static_cast<double>(i), p));
    }
    return acc.value() / nd;
}

double alpha_exponent(const BandwidthSchedule& sched, double tau_gamma, double ell) {
    return sched.decay() * (1.0 + tau_gamma * (1.0 - ell));
}

double beta_exponent(const BandwidthSchedule& sched, double tau_gamma, double r) {
    return sched.decay() * tau_gamma * r;
}

}  // namespace

FiniteSequences finite_sequences(const BandwidthSchedule& sched, double tau_gamma, std::size_t n,
                                 double ell, std::span<const double> r_list) {
    if (n < 1) throw DomainError("finite_sequences: n must be at least 1");
    if (!(ell >= 0.0 && ell <= 1.0)) throw DomainError("finite_sequences: ell must lie in [0, 1]");
    if (!(tau_gamma > 0.0)) throw DomainError("finite_sequences: gamma must be positive");
    FiniteSequences out;
    const double pa = alpha_exponent(sched, tau_gamma, ell);
    out.a_n = SeqValue{cesaro_power_sum(n, pa), pa < 1.0};
    out.b_n.reserve(r_list.size());
    for (double r : r_list) {
        if (r > 2.0) throw DomainError("finite_sequences: exponent r must satisfy r <= 2");
        const double pb = beta_exponent(sched, tau_gamma, r);
        out.b_n.emplace_back(r, SeqValue{cesaro_power_sum(n, pb), pb < 1.0});
    }
    return out;
}

double alpha_limit(const BandwidthSchedule& sched, double tau_gamma, double ell) {
    if (!(ell >= 0.0 && ell <= 1.0)) throw DomainError("alpha_limit: ell must lie in [0, 1]");
    const double p = alpha_exponent(sched, tau_gamma, ell);
    if (p >= 1.0)
        throw DivergenceError("A_{n,ell} diverges: a + a*gamma*(1 - ell) = " + format_double(p) +
                              " >= 1");
    return 1.0 / (1.0 - p);
}

double beta_limit(const BandwidthSchedule& sched, double tau_gamma, double r) {
    if (r > 2.0) throw DomainError("beta_limit: exponent r must satisfy r <= 2");
    const double p = beta_exponent(sched, tau_gamma, r);
    if (p >= 1.0)
        throw DivergenceError("B_{n,r} diverges: a*gamma*r = " + format_double(p) + " >= 1");
    return 1.0 / (1.0 - p);
}

double AsymptoticConstants::beta(double r) const {
    if (std::abs(r - (1.0 - ell)) <= 1e-9) return beta_one_minus_ell;
    if (std::abs(r - (1.0 - 2.0 * ell)) <= 1e-9) return beta_one_minus_two_ell;
    for (const auto& [key, value] : beta_table) {
        if (std::abs(key - r) <= 1e-9) return value;
    }
    throw DomainError("beta[r] was not computed for r = " + format_double(r));
}

AsymptoticConstants asymptotic_constants(const Kernel& kernel, const TauModel& tau,
                                         const BandwidthSchedule& sched, double ell,
                                         std::span<const double> extra_r) {
    if (!(ell >= 0.0 && ell <= 1.0))
        throw ValidationError("asymptotic_constants: ell must lie in [0, 1]");
    AsymptoticConstants c;
    c.ell = ell;
    const MConstants m = m_constants(kernel, tau);
    c.m0 = m.m0;
    c.m1 = m.m1;
    c.m2 = m.m2;
    if (!tau.is_power_law())
        throw ValidationError("asymptotic_constants: limits need a power-law tau0");
    const double gamma = tau.gamma();
    c.alpha_ell = alpha_limit(sched, gamma, ell);
    c.beta_one_minus_ell = beta_limit(sched, gamma, 1.0 - ell);
    c.beta_one_minus_two_ell = beta_limit(sched, gamma, 1.0 - 2.0 * ell);
    for (double r : extra_r) {
        c.beta_table.emplace_back(r, beta_limit(sched, gamma, r));
    }
    return c;
}

double v_ell(const AsymptoticConstants& c, double sigma2_eps, double f1) {
    if (!(f1 > 0.0)) throw DomainError("v_ell: requires f1 > 0");
    if (sigma2_eps < 0.0) throw DomainError("v_ell: negative noise variance");
    return c.beta_one_minus_two_ell / (c.beta_one_minus_ell * c.beta_one_minus_ell) *
           (sigma2_eps / f1) * c.m2;
}

double predict_bias(const AsymptoticConstants& c, double zeta_prime, double h_n) {
    return h_n * zeta_prime * (c.alpha_ell / c.beta_one_minus_ell) * (c.m0 / c.m1);
}

SecondOrderPrediction predict_second_order(const AsymptoticConstants& c, double r_chi,
                                           double sigma2_eps, double f1, double n,
                                           double phi_hn) {
    if (!(f1 > 0.0)) throw DomainError("predict_second_order: requires f1 > 0");
    if (!(n * phi_hn > 0.0)) throw DomainError("predict_second_order: requires n*phi(h_n) > 0");
    const double base = c.beta_one_minus_two_ell / (c.beta_one_minus_ell * c.beta_one_minus_ell) *
                        (c.m2 / f1) / (n * phi_hn);
    SecondOrderPrediction p;
    p.var_fn = base;
    p.var_phin = (r_chi * r_chi + sigma2_eps) * base;
    p.cov_n = r_chi * base;
    return p;
}

double predict_mse(const AsymptoticConstants& c, double zeta_prime, double sigma2_eps, double f1,
                   double n, double h_n, double phi_hn) {
    if (!(f1 > 0.0)) throw DomainError("predict_mse: requires f1 > 0");
    if (!(n * phi_hn > 0.0)) throw DomainError("predict_mse: requires n*phi(h_n) > 0");
    const double bias = predict_bias(c, zeta_prime, h_n);
    const double variance = c.beta_one_minus_two_ell * c.m2 * sigma2_eps /
                            (c.beta_one_minus_ell * c.beta_one_minus_ell * c.m1 * c.m1 * f1 * n *
                             phi_hn);
    return bias * bias + variance;
}

TheoryPrediction predict_all(const AsymptoticConstants& c, double zeta_prime, double r_chi,
                             double sigma2_eps, double f1, double n, double h_n, double phi_hn) {
    TheoryPrediction t;
    t.bias_n = predict_bias(c, zeta_prime, h_n);
    const SecondOrderPrediction second =
        predict_second_order(c, r_chi, sigma2_eps, f1, n, phi_hn);
    t.var_fn = second.var_fn;
    t.var_phin = second.var_phin;
    t.cov_n = second.cov_n;
    t.mse_n = predict_mse(c, zeta_prime, sigma2_eps, f1, n, h_n, phi_hn);
    t.as_bound = (2.0 / c.m1) * (1.0 + v_ell(c, sigma2_eps, f1));
    return t;
}

}  // namespace funrec
