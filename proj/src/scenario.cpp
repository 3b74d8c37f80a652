#include "funrec/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"
#include "funrec/quadrature.hpp"
#include "funrec/rng.hpp"

namespace funrec {

namespace {

constexpr std::uint64_t kZetaStream = 0x5a45u;  // zeta-estimation stream tag

std::vector<double> brownian_path(Rng& rng, const Grid& grid, double scale) {
    std::vector<double> v(grid.size());
    v[0] = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double dt = grid.points()[k] - grid.points()[k - 1];
        v[k] = v[k - 1] + rng.gaussian() * scale * std::sqrt(dt);
    }
    return v;
}

std::vector<double> bridge_path(Rng& rng, const Grid& grid, double scale) {
    std::vector<double> v = brownian_path(rng, grid, scale);
    const double last = v.back();
    const double t0 = grid.points().front();
    const double span = grid.span();
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double u = (grid.points()[k] - t0) / span;
        v[k] -= u * last;
    }
    return v;
}

}  // namespace

double RegressionOperator::operator()(const Curve& x) const {
    switch (kind) {
        case OperatorKind::Integral:
            return integrate(x.values(), *x.grid());
        case OperatorKind::SquareIntegral: {
            CompensatedSum acc;
            for (std::size_t k = 0; k < x.size(); ++k)
                acc.add(x.grid()->weights()[k] * x[k] * x[k]);
            return acc.value();
        }
        case OperatorKind::AbsDeviation:
            return std::abs(integrate(x.values(), *x.grid()) - center);
        case OperatorKind::SquareDeviation: {
            const double d = integrate(x.values(), *x.grid()) - center;
            return d * d;
        }
        case OperatorKind::Constant:
            return value;
    }
    throw ValidationError("RegressionOperator: unknown kind");
}

Curve QuerySpec::build(GridPtr grid) const {
    switch (kind) {
        case Kind::ConstantLevel: return Curve::constant(std::move(grid), level);
        case Kind::Linear: return Curve::linear(std::move(grid), value_at0, value_at1);
    }
    throw ValidationError("QuerySpec: unknown kind");
}

Scenario::Scenario(ProcessSpec process, RegressionOperator op, double sigma_eps,
                   std::vector<QuerySpec> queries, std::uint64_t seed, std::size_t grid_points)
    : process_(process),
      operator_(op),
      sigma_eps_(sigma_eps),
      queries_(std::move(queries)),
      seed_(seed),
      grid_points_(grid_points) {
    if (!(sigma_eps_ >= 0.0) || !std::isfinite(sigma_eps_))
        throw ValidationError("Scenario: sigma_eps must be finite and nonnegative");
    if (queries_.empty()) throw ValidationError("Scenario: need at least one query point");
    if (process_.kind == ProcessKind::FunctionalAr1 &&
        !(process_.rho > 0.0 && process_.rho < 1.0))
        throw ValidationError("Scenario: AR coefficient must lie in (0, 1)");
    if (process_.kind != ProcessKind::ScalarUniform && !(process_.scale > 0.0))
        throw ValidationError("Scenario: innovation scale must be positive");
    grid_ = Grid::uniform(grid_points_);
}

std::vector<Curve> Scenario::query_curves() const {
    std::vector<Curve> out;
    out.reserve(queries_.size());
    for (const auto& q : queries_) out.push_back(q.build(grid_));
    return out;
}

std::vector<LabeledCurve> Scenario::generate(std::size_t n) const {
    return generate_with_seed(seed_, n);
}

std::vector<LabeledCurve> Scenario::generate_with_seed(std::uint64_t seed, std::size_t n) const {
    if (n < 1) throw DomainError("generate: n must be at least 1");
    Rng rng(seed);
    std::vector<LabeledCurve> out;
    out.reserve(n);
    std::vector<double> prev;
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> vals;
        switch (process_.kind) {
            case ProcessKind::ScalarUniform:
                vals.assign(grid_->size(), rng.uniform01());
                break;
            case ProcessKind::IidBrownian:
                vals = brownian_path(rng, *grid_, process_.scale);
                break;
            case ProcessKind::FunctionalAr1: {
                std::vector<double> innov = bridge_path(rng, *grid_, process_.scale);
                if (t == 0) {
                    vals = std::move(innov);  // stationary start
                } else {
                    const double rho = process_.rho;
                    const double lam = std::sqrt(1.0 - rho * rho);
                    vals.resize(grid_->size());
                    for (std::size_t k = 0; k < vals.size(); ++k)
                        vals[k] = rho * prev[k] + lam * innov[k];
                }
                prev = vals;
                break;
            }
        }
        Curve x(grid_, std::move(vals));
        const double y = operator_(x) + sigma_eps_ * rng.gaussian();
        out.emplace_back(std::move(x), y);
    }
    return out;
}

double Scenario::true_regression(const Curve& chi) const { return operator_(chi); }

namespace {

// Constant-level queries are the only ones with closed-form scalar analytics.
std::optional<double> constant_level(const Curve& chi) {
    const double v0 = chi[0];
    for (std::size_t k = 1; k < chi.size(); ++k) {
        if (chi[k] != v0) return std::nullopt;
    }
    return v0;
}

}  // namespace

std::optional<double> Scenario::zeta_prime_closed_form(const Curve& chi) const {
    if (process_.kind != ProcessKind::ScalarUniform) return std::nullopt;
    const auto level = constant_level(chi);
    if (!level || !(*level > 0.0 && *level < 1.0)) return std::nullopt;
    // For a symmetric scalar covariate the drift slope vanishes wherever the
    // operator is differentiable in the level; AbsDeviation centered at the
    // query level contributes slope one.
    if (operator_.kind == OperatorKind::AbsDeviation &&
        std::abs(*level - operator_.center) <= 1e-12)
        return 1.0;
    return 0.0;
}

std::optional<double> Scenario::f1_closed_form(const Curve& chi) const {
    if (process_.kind != ProcessKind::ScalarUniform) return std::nullopt;
    const auto level = constant_level(chi);
    if (!level || !(*level > 0.0 && *level < 1.0)) return std::nullopt;
    return 2.0;
}

std::optional<double> Scenario::smallball_gamma_closed_form() const {
    if (process_.kind != ProcessKind::ScalarUniform) return std::nullopt;
    return 1.0;
}

ZetaEstimate estimate_zeta_prime(const Scenario& scenario, const Curve& chi,
                                 const SemiNorm& seminorm, std::size_t n_mc,
                                 double band_quantile, std::size_t n_bootstrap) {
    if (n_mc < 10000) throw DomainError("estimate_zeta_prime: need n_mc >= 10000");
    if (!(band_quantile > 0.0 && band_quantile < 1.0))
        throw DomainError("estimate_zeta_prime: band quantile must lie in (0, 1)");

    const auto data =
        scenario.generate_with_seed(derive_seed(scenario.seed(), kZetaStream, 0), n_mc);
    const double r_chi = scenario.true_regression(chi);

    std::vector<std::pair<double, double>> pairs;  // (t, r(X) - r(chi))
    pairs.reserve(n_mc);
    for (const auto& obs : data) {
        const double t = seminorm.distance(chi, obs.first);
        pairs.emplace_back(t, scenario.true_regression(obs.first) - r_chi);
    }
    std::sort(pairs.begin(), pairs.end());

    const std::size_t band =
        static_cast<std::size_t>(std::ceil(band_quantile * static_cast<double>(n_mc)));
    std::vector<double> ts, ds;
    for (std::size_t k = 0; k < std::min(band, pairs.size()); ++k) {
        if (pairs[k].first <= 0.0) continue;  // exact hits carry no slope information
        ts.push_back(pairs[k].first);
        ds.push_back(pairs[k].second);
    }
    if (ts.size() < 30)
        throw PrecisionError("estimate_zeta_prime: only " + std::to_string(ts.size()) +
                             " usable small-distance samples in the band [0, " +
                             format_double(ts.empty() ? 0.0 : ts.back()) + "]");

    const auto slope_of = [](std::span<const double> t, std::span<const double> d) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            num += t[k] * d[k];
            den += t[k] * t[k];
        }
        return num / den;
    };

    ZetaEstimate z;
    z.slope = slope_of(ts, ds);
    z.band_upper = ts.back();
    z.band_size = ts.size();

    Rng boot(derive_seed(scenario.seed(), kZetaStream, 1));
    std::vector<double> slopes(n_bootstrap);
    std::vector<double> bt(ts.size()), bd(ts.size());
    for (std::size_t b = 0; b < n_bootstrap; ++b) {
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const auto idx = static_cast<std::size_t>(boot.uniform01() *
                                                      static_cast<double>(ts.size()));
            bt[k] = ts[std::min(idx, ts.size() - 1)];
            bd[k] = ds[std::min(idx, ts.size() - 1)];
        }
        slopes[b] = slope_of(bt, bd);
    }
    z.std_error = n_bootstrap >= 2 ? std::sqrt(sample_variance(slopes)) : 0.0;
    return z;
}

const char* to_string(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::ScalarUniform: return "scalar_uniform";
        case ProcessKind::IidBrownian: return "iid_brownian";
        case ProcessKind::FunctionalAr1: return "functional_ar1";
    }
    return "?";
}

const char* to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Integral: return "integral";
        case OperatorKind::SquareIntegral: return "square_integral";
        case OperatorKind::AbsDeviation: return "abs_deviation";
        case OperatorKind::SquareDeviation: return "square_deviation";
        case OperatorKind::Constant: return "constant";
    }
    return "?";
}

namespace {

ProcessKind process_kind_from_string(const std::string& s) {
    if (s == "scalar_uniform") return ProcessKind::ScalarUniform;
    if (s == "iid_brownian") return ProcessKind::IidBrownian;
    if (s == "functional_ar1") return ProcessKind::FunctionalAr1;
    throw ValidationError("unknown process kind: " + s);
}

OperatorKind operator_kind_from_string(const std::string& s) {
    if (s == "integral") return OperatorKind::Integral;
    if (s == "square_integral") return OperatorKind::SquareIntegral;
    if (s == "abs_deviation") return OperatorKind::AbsDeviation;
    if (s == "square_deviation") return OperatorKind::SquareDeviation;
    if (s == "constant") return OperatorKind::Constant;
    throw ValidationError("unknown operator kind: " + s);
}

}  // namespace

nlohmann::json Scenario::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["process"]["kind"] = to_string(process_.kind);
    if (process_.kind == ProcessKind::FunctionalAr1) j["process"]["rho"] = process_.rho;
    if (process_.kind != ProcessKind::ScalarUniform) j["process"]["scale"] = process_.scale;
    j["operator"]["kind"] = to_string(operator_.kind);
    if (operator_.kind == OperatorKind::AbsDeviation ||
        operator_.kind == OperatorKind::SquareDeviation)
        j["operator"]["center"] = operator_.center;
    if (operator_.kind == OperatorKind::Constant) j["operator"]["value"] = operator_.value;
    j["sigma_eps"] = sigma_eps_;
    j["grid_points"] = grid_points_;
    j["seed"] = seed_;
    nlohmann::json qs = nlohmann::json::array();
    for (const auto& q : queries_) {
        nlohmann::json qj;
        if (q.kind == QuerySpec::Kind::ConstantLevel) {
            qj["kind"] = "constant";
            qj["level"] = q.level;
        } else {
            qj["kind"] = "linear";
            qj["value_at0"] = q.value_at0;
            qj["value_at1"] = q.value_at1;
        }
        qs.push_back(std::move(qj));
    }
    j["queries"] = std::move(qs);
    return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
    try {
        if (j.value("schema_version", 0) != 1)
            throw ValidationError("scenario: unsupported schema_version");
        ProcessSpec process;
        process.kind = process_kind_from_string(j.at("process").at("kind").get<std::string>());
        process.rho = j.at("process").value("rho", 0.5);
        process.scale = j.at("process").value("scale", 1.0);

        RegressionOperator op;
        op.kind = operator_kind_from_string(j.at("operator").at("kind").get<std::string>());
        op.center = j.at("operator").value("center", 0.0);
        op.value = j.at("operator").value("value", 0.0);

        std::vector<QuerySpec> queries;
        for (const auto& qj : j.at("queries")) {
            QuerySpec q;
            const auto kind = qj.at("kind").get<std::string>();
            if (kind == "constant") {
                q.kind = QuerySpec::Kind::ConstantLevel;
                q.level = qj.at("level").get<double>();
            } else if (kind == "linear") {
                q.kind = QuerySpec::Kind::Linear;
                q.value_at0 = qj.at("value_at0").get<double>();
                q.value_at1 = qj.at("value_at1").get<double>();
            } else {
                throw ValidationError("scenario: unknown query kind: " + kind);
            }
            queries.push_back(q);
        }

        return Scenario(process, op, j.at("sigma_eps").get<double>(), std::move(queries),
                        j.at("seed").get<std::uint64_t>(),
                        j.value("grid_points", std::size_t{101}));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("scenario: malformed JSON: ") + e.what());
    }
}

}  // namespace funrec
