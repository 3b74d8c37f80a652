#include <cmath>
#include <vector>

#include "doctest.h"

#include "funrec/asymconst.hpp"
#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"
#include "helpers.hpp"

using namespace funrec;
using funrec::testing::rel_err;

namespace {

// Brute-force sums straight from the definitions, going through the bandwidth
// values themselves. The library computes the same quantities through the
// collapsed exponent form, so the two routes are independent.
double oracle_a(const BandwidthSchedule& s, double gamma, std::size_t n, double ell) {
    const double hn = s.h(n);
    const double phin = std::pow(hn, gamma);
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double hi = s.h(i);
        acc += (hi / hn) * std::pow(std::pow(hi, gamma) / phin, 1.0 - ell);
    }
    return acc / static_cast<double>(n);
}

double oracle_b(const BandwidthSchedule& s, double gamma, std::size_t n, double r) {
    const double phin = std::pow(s.h(n), gamma);
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) acc += std::pow(std::pow(s.h(i), gamma) / phin, r);
    return acc / static_cast<double>(n);
}

AsymptoticConstants manual_constants(double ell, double m0, double m1, double m2, double alpha,
                                     double beta_1ml, double beta_1m2l) {
    AsymptoticConstants c;
    c.ell = ell;
    c.m0 = m0;
    c.m1 = m1;
    c.m2 = m2;
    c.alpha_ell = alpha;
    c.beta_one_minus_ell = beta_1ml;
    c.beta_one_minus_two_ell = beta_1m2l;
    return c;
}

}  // namespace

TEST_SUITE("asymconst") {

TEST_CASE("tau model validation") {
    CHECK_THROWS_AS(TauModel::power_law(0.0), ValidationError);
    CHECK_THROWS_AS(TauModel::custom({0.0, 0.5, 1.0}, {0.0, 0.8, 0.5}), ValidationError);
    CHECK_THROWS_AS(TauModel::custom({0.0, 1.0}, {0.1, 1.0}), ValidationError);
    const TauModel t = TauModel::power_law(2.0);
    CHECK(t(0.0) == 0.0);
    CHECK(t(1.0) == 1.0);
    CHECK(std::abs(t(0.5) - 0.25) <= 1e-15);
}

TEST_CASE("moment constants for the uniform kernel") {
    const auto m = m_constants(Kernel::uniform(), TauModel::power_law(2.0));
    CHECK(std::abs(m.m1 - 1.0) <= 1e-12);  // K' = 0, K(1) = 1
    CHECK(std::abs(m.m2 - 1.0) <= 1e-12);
    CHECK(std::abs(m.m0 - 2.0 / 3.0) <= 1e-8);  // 1 - int s^2 ds
}

TEST_CASE("moment constants for the quadratic kernel") {
    const auto m = m_constants(Kernel::quadratic(), TauModel::power_law(1.0));
    CHECK(std::abs(m.m1 - 1.0) <= 1e-8);         // 0 - int (-3s) s ds = 1
    CHECK(std::abs(m.m0 - 3.0 / 8.0) <= 1e-8);   // int s (3/2)(1 - s^2) ds
    CHECK(std::abs(m.m2 - 6.0 / 5.0) <= 1e-8);   // int (9/4)(1 - s^2)^2 ds
}

TEST_CASE("direct and integration-by-parts routes agree") {
    const std::vector<Kernel> kernels = {Kernel::uniform(), Kernel::triangle(),
                                         Kernel::quadratic()};
    for (const auto& k : kernels) {
        for (double gamma : {1.0, 2.0}) {
            const auto tau = TauModel::power_law(gamma);
            const auto direct = m_constants_direct(k, tau);
            const auto parts = m_constants_stieltjes(k, tau);
            CHECK(std::abs(direct.m0 - parts.m0) <= 1e-8);
            CHECK(std::abs(direct.m1 - parts.m1) <= 1e-8);
            CHECK(std::abs(direct.m2 - parts.m2) <= 1e-8);
        }
        // fractional exponents hit the singular density harder
        const auto tau = TauModel::power_law(1.5);
        const auto direct = m_constants_direct(k, tau);
        const auto parts = m_constants_stieltjes(k, tau);
        CHECK(std::abs(direct.m1 - parts.m1) <= 1e-6);
    }
}

TEST_CASE("M1 and M2 are positive for admissible kernels") {
    const std::vector<Kernel> kernels = {Kernel::uniform(), Kernel::triangle(),
                                         Kernel::quadratic(),
                                         Kernel::custom({0.0, 0.5, 1.0}, {1.0, 0.6, 0.2})};
    for (const auto& k : kernels) {
        for (double gamma : {0.5, 1.0, 2.0}) {
            const auto m = m_constants(k, TauModel::power_law(gamma));
            CHECK(m.m1 > 0.0);
            CHECK(m.m2 > 0.0);
        }
    }
}

TEST_CASE("tabulated kernels and tabulated tau use the parts route") {
    // A tabulated uniform kernel must reproduce the analytic constants.
    const Kernel tab = Kernel::custom({0.0, 1.0}, {1.0, 1.0});
    const auto m = m_constants(tab, TauModel::power_law(2.0));
    CHECK(std::abs(m.m0 - 2.0 / 3.0) <= 1e-8);
    CHECK(std::abs(m.m1 - 1.0) <= 1e-8);
    CHECK(std::abs(m.m2 - 1.0) <= 1e-8);

    // A linear tau table is exactly tau0(s) = s.
    std::vector<double> s(21), tau(21);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = tau[k] = static_cast<double>(k) / 20.0;
    const auto direct = m_constants_direct(Kernel::quadratic(), TauModel::power_law(1.0));
    const auto tabbed = m_constants_stieltjes(Kernel::quadratic(), TauModel::custom(s, tau));
    CHECK(std::abs(direct.m0 - tabbed.m0) <= 1e-8);
    CHECK(std::abs(direct.m1 - tabbed.m1) <= 1e-8);
    CHECK(std::abs(direct.m2 - tabbed.m2) <= 1e-8);
}

TEST_CASE("finite sequences match the brute-force oracle") {
    const BandwidthSchedule sched(0.5, 0.25);
    const double gamma = 2.0;
    const std::vector<double> rs = {0.0, 0.5, 1.0, -1.0};
    const auto seq = finite_sequences(sched, gamma, 10000, 0.3, rs);
    CHECK(rel_err(seq.a_n.value, oracle_a(sched, gamma, 10000, 0.3)) <= 1e-9);
    for (const auto& [r, v] : seq.b_n) {
        CHECK(rel_err(v.value, oracle_b(sched, gamma, 10000, r)) <= 1e-9);
    }
}

TEST_CASE("B_{n,0} is exactly one") {
    const BandwidthSchedule sched(0.7, 0.4);
    const std::vector<double> rs = {0.0};
    const auto seq = finite_sequences(sched, 1.5, 1234, 0.5, rs);
    CHECK(seq.b_n[0].second.value == 1.0);
}

TEST_CASE("finite sequences approach the closed-form limits") {
    // B_{n,1} -> 2 for xi = a*gamma = 0.5
    const BandwidthSchedule s1(0.5, 0.25);
    const std::vector<double> r1 = {1.0};
    const auto b = finite_sequences(s1, 2.0, 100000, 0.0, r1);
    CHECK(std::abs(b.b_n[0].second.value - 2.0) <= 1e-2);
    CHECK(std::abs(beta_limit(s1, 2.0, 1.0) - 2.0) <= 1e-15);

    // A_{n,1} -> 1.25 for a = 0.2, gamma = 1
    const BandwidthSchedule s2(0.5, 0.2);
    const auto a = finite_sequences(s2, 1.0, 100000, 1.0, {});
    CHECK(std::abs(a.a_n.value - 1.25) <= 1e-2);
    CHECK(std::abs(alpha_limit(s2, 1.0, 1.0) - 1.25) <= 1e-15);

    // the gap to the limit shrinks monotonically in n
    double prev = 1e300;
    for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
        const double gap = std::abs(finite_sequences(s2, 1.0, n, 1.0, {}).a_n.value - 1.25);
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("beta is nondecreasing in r") {
    const BandwidthSchedule sched(0.5, 0.2);
    const double gamma = 2.0;  // a*gamma = 0.4, so r = 2 still converges
    double prev = -1.0;
    for (double r : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const double b = beta_limit(sched, gamma, r);
        CHECK(b >= prev);
        prev = b;
    }
    CHECK(beta_limit(sched, gamma, 0.0) == 1.0);
}

TEST_CASE("divergent configurations are flagged and named") {
    const BandwidthSchedule sched(0.5, 0.6);
    CHECK_THROWS_WITH_AS(beta_limit(sched, 2.0, 1.0), doctest::Contains("a*gamma*r"),
                         DivergenceError);
    CHECK_THROWS_WITH_AS(alpha_limit(sched, 2.0, 0.0), doctest::Contains("a + a*gamma*(1 - ell)"),
                         DivergenceError);
    // the finite-n sum is still returned, with the flag cleared
    const std::vector<double> rs = {1.0};
    const auto seq = finite_sequences(sched, 2.0, 1000, 0.0, rs);
    CHECK_FALSE(seq.a_n.convergent);
    CHECK_FALSE(seq.b_n[0].second.convergent);
    CHECK(seq.b_n[0].second.value > 0.0);
    CHECK_THROWS_AS(beta_limit(sched, 2.0, 2.5), DomainError);
}

TEST_CASE("v_ell") {
    // constant-bandwidth degenerate limit: all betas equal one
    const auto flat = manual_constants(0.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK(std::abs(v_ell(flat, 0.25, 2.0) - 0.125) <= 1e-15);
    CHECK(v_ell(flat, 0.0, 2.0) == 0.0);
    CHECK_THROWS_AS(v_ell(flat, 0.25, 0.0), DomainError);

    const auto c = asymptotic_constants(Kernel::uniform(), TauModel::power_law(2.0),
                                        BandwidthSchedule(0.5, 0.25), 0.0);
    CHECK(std::abs(v_ell(c, 1.0, 2.0) - 0.25) <= 1e-12);  // (beta/beta^2)(1/2) with beta = 2
}

TEST_CASE("bias prediction") {
    const auto c = manual_constants(0.0, 2.0 / 3.0, 1.0, 1.0, 1.25, 2.0, 2.0);
    CHECK(predict_bias(c, 0.0, 0.1) == 0.0);
    CHECK(std::abs(predict_bias(c, 1.0, 0.1) - 0.1 * 1.25 / 2.0 * (2.0 / 3.0)) <= 1e-15);
    CHECK(std::abs(predict_bias(c, 1.0, 0.2) - 2.0 * predict_bias(c, 1.0, 0.1)) <= 1e-15);
}

TEST_CASE("second order predictions") {
    const auto c = manual_constants(0.0, 0.5, 1.0, 1.0, 1.0, 2.0, 2.0);
    const auto p = predict_second_order(c, 0.0, 0.09, 2.0, 1e4, 0.01);
    CHECK(std::abs(p.var_fn - 0.0025) <= 1e-15);  // (2/4)(1/2)/100
    CHECK(p.cov_n == 0.0);
    CHECK(std::abs(p.var_phin - 0.09 * p.var_fn) <= 1e-15);

    const auto p4 = predict_second_order(c, 0.0, 0.09, 2.0, 4e4, 0.01);
    CHECK(std::abs(p4.var_fn - p.var_fn / 4.0) <= 1e-18);

    const auto with_r = predict_second_order(c, 0.7, 0.09, 2.0, 1e4, 0.01);
    CHECK(std::abs(with_r.cov_n - 0.7 * p.var_fn) <= 1e-15);
    CHECK(std::abs(with_r.var_phin - (0.49 + 0.09) * p.var_fn) <= 1e-15);

    CHECK_THROWS_AS(predict_second_order(c, 0.0, 0.09, -1.0, 1e4, 0.01), DomainError);
}

TEST_CASE("mse prediction composes bias and variance") {
    const auto c = manual_constants(0.0, 2.0 / 3.0, 1.0, 1.0, 1.25, 2.0, 2.0);
    CHECK(predict_mse(c, 0.0, 0.0, 2.0, 1e4, 0.1, 0.01) == 0.0);

    const double bias = predict_bias(c, 1.0, 0.1);
    const double var_part = 2.0 * 1.0 * 0.09 / (4.0 * 1.0 * 2.0 * 1e4 * 0.01);
    CHECK(std::abs(predict_mse(c, 1.0, 0.09, 2.0, 1e4, 0.1, 0.01) -
                   (bias * bias + var_part)) <= 1e-18);

    const auto all = predict_all(c, 1.0, 0.3, 0.09, 2.0, 1e4, 0.1, 0.01);
    CHECK(all.mse_n >= all.bias_n * all.bias_n);
    CHECK(all.as_bound > 0.0);
    CHECK(std::abs(all.as_bound - 2.0 * (1.0 + v_ell(c, 0.09, 2.0))) <= 1e-15);
}

TEST_CASE("optimal bandwidth balances bias and variance") {
    // Minimizing the predicted mse over h reproduces h* ~ n^{-1/(2+gamma)}.
    const double gamma = 1.0;
    const auto c = asymptotic_constants(Kernel::uniform(), TauModel::power_law(gamma),
                                        BandwidthSchedule(0.5, 0.25), 0.0);
    std::vector<double> log_n, log_h_star;
    for (double n : {1e3, 1e4, 1e5}) {
        double best_h = 0.0, best = 1e300;
        for (int k = 0; k < 4000; ++k) {
            const double h = std::exp(std::log(1e-4) + k * (std::log(1.0) - std::log(1e-4)) / 4000.0);
            const double mse = predict_mse(c, 1.0, 0.25, 2.0, n, h, std::pow(h, gamma));
            if (mse < best) {
                best = mse;
                best_h = h;
            }
        }
        log_n.push_back(std::log(n));
        log_h_star.push_back(std::log(best_h));
    }
    const double slope = funrec::fit_line(log_n, log_h_star).slope;
    CHECK(std::abs(slope - (-1.0 / (2.0 + gamma))) <= 0.02);
}

TEST_CASE("predictors depend on the small-ball law only through invariant ratios") {
    // Rescaling F by c splits as f1 -> c*f1, phi -> phi/c; the predictors that
    // consume both must not move.
    const auto c = manual_constants(0.3, 0.5, 0.9, 1.1, 1.4, 1.8, 2.2);
    for (double scale : {0.1, 10.0}) {
        const double f1 = 2.0, phi = 0.01;
        CHECK(rel_err(predict_mse(c, 1.0, 0.25, f1, 1e4, 0.1, phi),
                      predict_mse(c, 1.0, 0.25, scale * f1, 1e4, 0.1, phi / scale)) <= 1e-12);
        CHECK(rel_err(predict_second_order(c, 0.4, 0.25, f1, 1e4, phi).var_fn,
                      predict_second_order(c, 0.4, 0.25, scale * f1, 1e4, phi / scale).var_fn) <=
              1e-12);
        CHECK(rel_err(v_ell(c, 0.25, scale * f1), v_ell(c, 0.25, f1) / scale) <= 1e-12);
    }
}

TEST_CASE("asymptotic constants bundle") {
    const std::vector<double> extra = {0.5};
    const auto c = asymptotic_constants(Kernel::uniform(), TauModel::power_law(2.0),
                                        BandwidthSchedule(0.5, 0.25), 0.0, extra);
    CHECK(std::abs(c.beta(1.0) - 2.0) <= 1e-15);        // 1 - 2*ell = 1 at ell = 0
    CHECK(std::abs(c.beta(0.5) - 4.0 / 3.0) <= 1e-15);  // extra entry
    CHECK_THROWS_AS(c.beta(1.75), DomainError);
    CHECK(std::abs(c.alpha_ell - 1.0 / (1.0 - 0.25 - 0.5)) <= 1e-15);
}

}  // TEST_SUITE
