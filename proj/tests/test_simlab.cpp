#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"
#include "funrec/quadrature.hpp"
#include "funrec/scenario.hpp"

using namespace funrec;

namespace {

Scenario scalar_scenario(OperatorKind op_kind, double sigma, std::uint64_t seed,
                         double center = 0.5) {
    RegressionOperator op;
    op.kind = op_kind;
    op.center = center;
    return Scenario(ProcessSpec{ProcessKind::ScalarUniform}, op, sigma,
                    {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, seed, 5);
}

double trace_integral(const Curve& x) { return integrate(x.values(), *x.grid()); }

// lag-k autocorrelation of a scalar series
double lag_corr(const std::vector<double>& xs, std::size_t lag) {
    const std::size_t n = xs.size() - lag;
    std::vector<double> a(xs.begin(), xs.begin() + n);
    std::vector<double> b(xs.begin() + lag, xs.end());
    return sample_covariance(a, b) /
           std::sqrt(sample_variance(a) * sample_variance(b));
}

}  // namespace

TEST_SUITE("simlab") {

TEST_CASE("scenario validation") {
    CHECK_THROWS_AS(scalar_scenario(OperatorKind::Integral, -0.1, 1), ValidationError);
    CHECK_THROWS_AS(Scenario(ProcessSpec{ProcessKind::FunctionalAr1, 1.2, 1.0},
                             RegressionOperator{}, 0.1,
                             {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 1),
                    ValidationError);
    CHECK_THROWS_AS(Scenario(ProcessSpec{}, RegressionOperator{}, 0.1, {}, 1),
                    ValidationError);
}

TEST_CASE("noiseless generation returns the exact regression") {
    const auto s = scalar_scenario(OperatorKind::SquareIntegral, 0.0, 99);
    for (const auto& [x, y] : s.generate(200)) {
        CHECK(y == s.true_regression(x));
    }
}

TEST_CASE("generation is a pure function of the seed") {
    for (ProcessKind kind :
         {ProcessKind::ScalarUniform, ProcessKind::IidBrownian, ProcessKind::FunctionalAr1}) {
        const Scenario s(ProcessSpec{kind, 0.5, 1.0}, RegressionOperator{}, 0.3,
                         {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 4242, 21);
        const auto a = s.generate(50);
        const auto b = s.generate(50);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].second == b[i].second);
            CHECK(a[i].first.values() == b[i].first.values());
        }
        const auto c = s.generate_with_seed(4243, 50);
        CHECK(c[0].second != a[0].second);
    }
}

TEST_CASE("AR(1) trace series shows the configured lag-one correlation") {
    const Scenario s(ProcessSpec{ProcessKind::FunctionalAr1, 0.5, 1.0}, RegressionOperator{},
                     0.0, {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 1717, 51);
    const auto data = s.generate(10000);
    std::vector<double> trace(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) trace[i] = trace_integral(data[i].first);
    CHECK(std::abs(lag_corr(trace, 1) - 0.5) <= 0.05);
}

TEST_CASE("AR(1) correlations decay geometrically") {
    const double rho = 0.6;
    const Scenario s(ProcessSpec{ProcessKind::FunctionalAr1, rho, 1.0}, RegressionOperator{},
                     0.0, {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 2718, 31);
    const auto data = s.generate(10000);
    std::vector<double> trace(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) trace[i] = trace_integral(data[i].first);

    std::vector<double> ks, log_corr;
    for (std::size_t k = 1; k <= 10; ++k) {
        const double c = lag_corr(trace, k);
        REQUIRE(c > 0.0);
        ks.push_back(static_cast<double>(k));
        log_corr.push_back(std::log(c));
    }
    const double fitted_rho = std::exp(fit_line(ks, log_corr).slope);
    CHECK(std::abs(fitted_rho - rho) <= 0.1);
}

TEST_CASE("scalar process marginals are uniform") {
    const auto s = scalar_scenario(OperatorKind::Integral, 0.0, 31337);
    const auto data = s.generate(10000);
    std::vector<double> levels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) levels[i] = data[i].first[0];
    std::sort(levels.begin(), levels.end());
    // Kolmogorov statistic against Uniform(0, 1); 1.6276/sqrt(n) is the 1%
    // critical value.
    double ks = 0.0;
    const double n = static_cast<double>(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double ecdf_hi = static_cast<double>(i + 1) / n;
        const double ecdf_lo = static_cast<double>(i) / n;
        ks = std::max({ks, std::abs(ecdf_hi - levels[i]), std::abs(levels[i] - ecdf_lo)});
    }
    CHECK(ks <= 1.6276 / std::sqrt(n));
}

TEST_CASE("the sample maximum of the noise grows like sqrt(log n)") {
    const auto s = scalar_scenario(OperatorKind::Constant, 1.0, 0, 0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        for (std::size_t n : {std::size_t{1000}, std::size_t{10000}, std::size_t{100000}}) {
            const auto data = s.generate_with_seed(derive_seed(7, 1, seed), n);
            double max_abs = 0.0;
            for (const auto& obs : data) max_abs = std::max(max_abs, std::abs(obs.second));
            CHECK(max_abs / std::sqrt(std::log(static_cast<double>(n))) <= 2.2);
        }
    }
}

TEST_CASE("true regression values") {
    auto g = Grid::uniform(101);
    const Scenario s(ProcessSpec{ProcessKind::IidBrownian, 0.5, 1.0}, RegressionOperator{}, 0.0,
                     {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 1, 101);
    CHECK(std::abs(s.true_regression(Curve::constant(g, 1.0)) - 1.0) <= 1e-12);

    RegressionOperator sq;
    sq.kind = OperatorKind::SquareIntegral;
    const Scenario s2(ProcessSpec{ProcessKind::IidBrownian, 0.5, 1.0}, sq, 0.0,
                      {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 1, 101);
    CHECK(std::abs(s2.true_regression(Curve::linear(g, 0.0, 1.0)) - 1.0 / 3.0) <= 2e-5);

    const auto s3 = scalar_scenario(OperatorKind::SquareIntegral, 0.0, 5);
    CHECK(std::abs(s3.true_regression(Curve::constant(s3.grid(), 0.5)) - 0.25) <= 1e-12);
}

TEST_CASE("zeta slope closed forms") {
    auto chi = [](const Scenario& s) { return Curve::constant(s.grid(), 0.5); };

    const auto identity = scalar_scenario(OperatorKind::Integral, 0.1, 7);
    CHECK(*identity.zeta_prime_closed_form(chi(identity)) == 0.0);

    const auto square = scalar_scenario(OperatorKind::SquareDeviation, 0.1, 7);
    CHECK(*square.zeta_prime_closed_form(chi(square)) == 0.0);

    const auto kink = scalar_scenario(OperatorKind::AbsDeviation, 0.1, 7);
    CHECK(*kink.zeta_prime_closed_form(chi(kink)) == 1.0);

    const auto off_center = scalar_scenario(OperatorKind::AbsDeviation, 0.1, 7, 0.2);
    CHECK(*off_center.zeta_prime_closed_form(chi(off_center)) == 0.0);

    // no closed form away from the scalar process
    const Scenario fun(ProcessSpec{ProcessKind::IidBrownian, 0.5, 1.0}, RegressionOperator{},
                       0.1, {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5}}, 7, 21);
    CHECK_FALSE(fun.zeta_prime_closed_form(Curve::constant(fun.grid(), 0.5)).has_value());
    CHECK_FALSE(fun.f1_closed_form(Curve::constant(fun.grid(), 0.5)).has_value());
}

TEST_CASE("monte carlo zeta slope matches the closed forms") {
    const SemiNorm l2{SemiNormKind::L2};

    const auto flat = scalar_scenario(OperatorKind::Constant, 0.3, 21);
    const auto z0 = estimate_zeta_prime(flat, Curve::constant(flat.grid(), 0.5), l2, 20000);
    CHECK(std::abs(z0.slope) <= 1e-12);

    const auto identity = scalar_scenario(OperatorKind::Integral, 0.3, 22);
    const auto z1 = estimate_zeta_prime(identity, Curve::constant(identity.grid(), 0.5), l2,
                                        20000);
    CHECK(std::abs(z1.slope) <= std::max(0.1, 3.0 * z1.std_error));

    const auto curved = scalar_scenario(OperatorKind::SquareDeviation, 0.3, 23);
    const auto z2 = estimate_zeta_prime(curved, Curve::constant(curved.grid(), 0.5), l2, 20000);
    CHECK(std::abs(z2.slope) <= 0.08);  // finite band leaves an O(band) remainder

    const auto kink = scalar_scenario(OperatorKind::AbsDeviation, 0.3, 24);
    const auto z3 = estimate_zeta_prime(kink, Curve::constant(kink.grid(), 0.5), l2, 20000);
    CHECK(std::abs(z3.slope - 1.0) <= 1e-12);  // the drift is exactly t on the band

    CHECK_THROWS_AS(estimate_zeta_prime(kink, Curve::constant(kink.grid(), 0.5), l2, 5000),
                    DomainError);
    CHECK_THROWS_AS(
        estimate_zeta_prime(kink, Curve::constant(kink.grid(), 0.5), l2, 10000, 0.001),
        PrecisionError);
}

TEST_CASE("scenario json round trip") {
    const Scenario s(ProcessSpec{ProcessKind::FunctionalAr1, 0.7, 2.0}, RegressionOperator{},
                     0.25,
                     {QuerySpec{QuerySpec::Kind::ConstantLevel, 0.5},
                      QuerySpec{QuerySpec::Kind::Linear, 0.0, -1.0, 1.0}},
                     987654321, 41);
    const auto j = s.to_json();
    const Scenario back = Scenario::from_json(j);
    CHECK(back.to_json().dump() == j.dump());
    CHECK(back.generate(10)[3].second == s.generate(10)[3].second);

    CHECK_THROWS_AS(Scenario::from_json(nlohmann::json{{"schema_version", 2}}),
                    ValidationError);
}

}  // TEST_SUITE
