#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "funrec/curve.hpp"
#include "funrec/estimator.hpp"
#include "funrec/seminorm.hpp"

namespace funrec {

// Covariate process of a generative scenario.
//
//   ScalarUniform   curves constant in s at level U_t ~ Uniform(0, 1), iid.
//                   The canonical verification process: phi(h) = h, f1 = 2
//                   and tau0(s) = s are exact at interior query levels, and
//                   by independence two distinct observations land jointly in
//                   balls of radii h_i, h_j with probability (2h_i)(2h_j)
//                   exactly.
//   IidBrownian     iid Brownian-motion paths: cumulative Gaussian increments
//                   with variance scale^2 * (grid spacing), starting at 0.
//   FunctionalAr1   X_t = rho X_{t-1} + sqrt(1 - rho^2) * innovation_t with
//                   Brownian-bridge innovations (a Brownian path minus its
//                   linear interpolant to the endpoint, scaled) and a
//                   stationary start, so the marginal law does not drift.
//                   Geometrically mixing for |rho| < 1.
enum class ProcessKind { ScalarUniform, IidBrownian, FunctionalAr1 };

struct ProcessSpec {
    ProcessKind kind = ProcessKind::ScalarUniform;
    double rho = 0.5;    // FunctionalAr1 only, in (0, 1)
    double scale = 1.0;  // innovation scale for the functional processes
};

// Named regression operators. All are functions of the trace integral
// I = int x(s) ds except SquareIntegral, which integrates the square.
enum class OperatorKind { Integral, SquareIntegral, AbsDeviation, SquareDeviation, Constant };

struct RegressionOperator {
    OperatorKind kind = OperatorKind::Integral;
    double center = 0.0;  // AbsDeviation / SquareDeviation
    double value = 0.0;   // Constant

    double operator()(const Curve& x) const;
};

struct QuerySpec {
    enum class Kind { ConstantLevel, Linear };
    Kind kind = Kind::ConstantLevel;
    double level = 0.5;     // ConstantLevel
    double value_at0 = 0.0;  // Linear
    double value_at1 = 1.0;

    Curve build(GridPtr grid) const;
};

// A generative model Y_t = r(X_t) + sigma_eps * eps_t with iid standard
// Gaussian noise. Everything is a pure function of (seed, n).
class Scenario {
public:
    Scenario(ProcessSpec process, RegressionOperator op, double sigma_eps,
             std::vector<QuerySpec> queries, std::uint64_t seed, std::size_t grid_points = 101);

    const ProcessSpec& process() const { return process_; }
    const RegressionOperator& regression_operator() const { return operator_; }
    double sigma_eps() const { return sigma_eps_; }
    const std::vector<QuerySpec>& queries() const { return queries_; }
    std::uint64_t seed() const { return seed_; }
    const GridPtr& grid() const { return grid_; }

    std::vector<Curve> query_curves() const;

    std::vector<LabeledCurve> generate(std::size_t n) const;
    std::vector<LabeledCurve> generate_with_seed(std::uint64_t seed, std::size_t n) const;

    // Exact r(chi), by quadrature of the named functional.
    double true_regression(const Curve& chi) const;

    // Analytic values available only for the scalar reference process at
    // interior constant query levels.
    std::optional<double> zeta_prime_closed_form(const Curve& chi) const;
    std::optional<double> f1_closed_form(const Curve& chi) const;
    std::optional<double> smallball_gamma_closed_form() const;

    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& j);

private:
    ProcessSpec process_;
    RegressionOperator operator_;
    double sigma_eps_;
    std::vector<QuerySpec> queries_;
    std::uint64_t seed_;
    std::size_t grid_points_;
    GridPtr grid_;
};

struct ZetaEstimate {
    double slope = 0.0;       // estimated derivative of the conditional drift at 0
    double std_error = 0.0;   // bootstrap standard error
    double band_upper = 0.0;  // largest distance admitted into the fit
    std::size_t band_size = 0;
};

// Monte Carlo estimate of the conditional drift slope: regress
// r(X) - r(chi) on t = ||X - chi|| through the origin over the smallest-t
// quantile band. Throws PrecisionError when the band is too thin.
ZetaEstimate estimate_zeta_prime(const Scenario& scenario, const Curve& chi,
                                 const SemiNorm& seminorm, std::size_t n_mc,
                                 double band_quantile = 0.1, std::size_t n_bootstrap = 200);

const char* to_string(ProcessKind kind);
const char* to_string(OperatorKind kind);

}  // namespace funrec
