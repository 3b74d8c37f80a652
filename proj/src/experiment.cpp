#include "funrec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"

namespace funrec {

namespace {

constexpr std::uint64_t kReplicationStream = 0x5250u;

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON helpers for the component types
// ---------------------------------------------------------------------------

json kernel_to_json(const Kernel& k) {
    json j;
    j["kind"] = to_string(k.kind());
    if (k.kind() == KernelKind::Custom) {
        j["t"] = k.table_abscissae();
        j["k"] = k.table_values();
    }
    return j;
}

Kernel kernel_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return Kernel::uniform();
    if (kind == "triangle") return Kernel::triangle();
    if (kind == "quadratic") return Kernel::quadratic();
    if (kind == "custom")
        return Kernel::custom(j.at("t").get<std::vector<double>>(),
                              j.at("k").get<std::vector<double>>());
    throw ValidationError("unknown kernel kind: " + kind);
}

BandwidthSchedule schedule_from_json(const json& j) {
    return BandwidthSchedule(j.at("h1").get<double>(), j.at("a").get<double>());
}

json schedule_to_json(const BandwidthSchedule& s) {
    return json{{"h1", s.h1()}, {"a", s.decay()}};
}

std::string git_describe_string() {
    std::string out = "unknown";
    if (FILE* pipe = ::popen("git describe --always --dirty 2>/dev/null", "r")) {
        char buf[128];
        std::string acc;
        while (fgets(buf, sizeof(buf), pipe)) acc += buf;
        if (::pclose(pipe) == 0 && !acc.empty()) {
            while (!acc.empty() && (acc.back() == '\n' || acc.back() == '\r')) acc.pop_back();
            if (!acc.empty()) out = acc;
        }
    }
    return out;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw == 0 ? 1 : std::min(hw, 8u);
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

// ---------------------------------------------------------------------------
// Specs and configuration
// ---------------------------------------------------------------------------

StudyKind study_from_string(const std::string& name) {
    if (name == "mse-decay") return StudyKind::MseDecay;
    if (name == "variance-check") return StudyKind::VarianceCheck;
    if (name == "as-bound-check") return StudyKind::AsBoundCheck;
    if (name == "bias-check") return StudyKind::BiasCheck;
    if (name == "constants") return StudyKind::Constants;
    throw ValidationError("unknown study: " + name);
}

const char* to_string(StudyKind kind) {
    switch (kind) {
        case StudyKind::MseDecay: return "mse-decay";
        case StudyKind::VarianceCheck: return "variance-check";
        case StudyKind::AsBoundCheck: return "as-bound-check";
        case StudyKind::BiasCheck: return "bias-check";
        case StudyKind::Constants: return "constants";
    }
    return "?";
}

json EstimatorSpec::to_json() const {
    json j;
    j["ell"] = ell;
    j["kernel"] = kernel_to_json(kernel);
    j["seminorm"] = json{{"kind", to_string(seminorm.kind)}};
    j["schedule"] = schedule_to_json(schedule);
    if (smallball.plugin) {
        j["smallball"] = json{{"kind", "plugin"},
                              {"n_pilot", smallball.n_pilot},
                              {"q_lo", smallball.q_lo},
                              {"q_hi", smallball.q_hi}};
    } else if (smallball.model) {
        const auto& m = *smallball.model;
        if (m.kind() == SmallBallKind::PowerLaw) {
            json mj{{"kind", "power_law"}, {"C", m.c()}, {"gamma", m.gamma()}};
            if (std::isfinite(m.valid_up_to())) mj["valid_up_to"] = m.valid_up_to();
            j["smallball"] = std::move(mj);
        } else {
            j["smallball"] = json{{"kind", "empirical"}, {"distances", m.pilot_distances()}};
        }
    }
    if (truncation) j["truncation"] = json{{"delta", truncation->delta}, {"mu", truncation->mu}};
    return j;
}

EstimatorSpec EstimatorSpec::from_json(const json& j) {
    try {
        EstimatorSpec spec;
        spec.ell = j.at("ell").get<double>();
        spec.kernel = kernel_from_json(j.at("kernel"));
        spec.seminorm.kind =
            seminorm_kind_from_string(j.at("seminorm").at("kind").get<std::string>());
        spec.schedule = schedule_from_json(j.at("schedule"));
        const auto& sb = j.at("smallball");
        const auto kind = sb.at("kind").get<std::string>();
        if (kind == "plugin") {
            spec.smallball.plugin = true;
            spec.smallball.n_pilot = sb.value("n_pilot", std::size_t{2000});
            spec.smallball.q_lo = sb.value("q_lo", 0.05);
            spec.smallball.q_hi = sb.value("q_hi", 0.5);
        } else if (kind == "power_law") {
            spec.smallball.model = SmallBallModel::power_law(
                sb.at("C").get<double>(), sb.at("gamma").get<double>(),
                sb.value("valid_up_to", std::numeric_limits<double>::infinity()));
        } else if (kind == "empirical") {
            spec.smallball.model =
                SmallBallModel::empirical(sb.at("distances").get<std::vector<double>>());
        } else {
            throw ValidationError("unknown smallball kind: " + kind);
        }
        if (j.contains("truncation")) {
            Truncation t;
            t.delta = j.at("truncation").at("delta").get<double>();
            t.mu = j.at("truncation").at("mu").get<double>();
            spec.truncation = t;
        }
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("estimator: malformed JSON: ") + e.what());
    }
}

EstimatorConfig resolve_estimator(const EstimatorSpec& spec, std::span<const LabeledCurve> data,
                                  const Curve& query, double* gamma_hat_out) {
    if (!spec.smallball.plugin) {
        if (!spec.smallball.model)
            throw ValidationError("estimator: smallball model missing and plug-in mode off");
        return EstimatorConfig(spec.ell, spec.kernel, spec.seminorm, spec.schedule,
                               *spec.smallball.model, spec.truncation);
    }
    const std::size_t n_pilot = std::min(data.size(), spec.smallball.n_pilot);
    std::vector<double> distances;
    distances.reserve(n_pilot);
    for (std::size_t i = 0; i < n_pilot; ++i)
        distances.push_back(spec.seminorm.distance(query, data[i].first));
    const PowerLawFit fit = fit_powerlaw(distances, spec.smallball.q_lo, spec.smallball.q_hi);
    if (gamma_hat_out) *gamma_hat_out = fit.gamma;
    // C is unidentifiable in the ratio estimate, so the plug-in model keeps
    // only the exponent.
    return EstimatorConfig(spec.ell, spec.kernel, spec.seminorm, spec.schedule,
                           SmallBallModel::power_law(1.0, fit.gamma), spec.truncation);
}

ExperimentConfig::ExperimentConfig(Scenario scenario, EstimatorSpec estimator,
                                   std::vector<std::size_t> n_grid, std::size_t replications,
                                   std::uint64_t master_seed, StudyKind study, SlackConfig slack,
                                   unsigned threads)
    : scenario_(std::move(scenario)),
      estimator_(std::move(estimator)),
      n_grid_(std::move(n_grid)),
      replications_(replications),
      master_seed_(master_seed),
      study_(study),
      slack_(slack),
      threads_(threads) {
    if (n_grid_.empty()) throw ValidationError("experiment: n_grid must not be empty");
    for (std::size_t k = 0; k < n_grid_.size(); ++k) {
        if (n_grid_[k] < 1) throw ValidationError("experiment: sample sizes must be positive");
        if (k > 0 && n_grid_[k] <= n_grid_[k - 1])
            throw ValidationError("experiment: n_grid must be strictly increasing");
    }
    if (replications_ < 1) throw ValidationError("experiment: need at least one replication");
    if (!(slack_.as_bound_factor > 0.0) || !(slack_.variance_rtol > 0.0))
        throw ValidationError("experiment: slack factors must be positive");
    if (!(slack_.undefined_abort_fraction > 0.0 && slack_.undefined_abort_fraction <= 1.0))
        throw ValidationError("experiment: undefined-abort fraction must lie in (0, 1]");
    if (!(estimator_.ell >= 0.0 && estimator_.ell <= 1.0))
        throw ValidationError("experiment: ell must lie in [0, 1]");
    if (!(estimator_.kernel.infimum() > 0.0))
        throw ValidationError("experiment: estimation kernel must be bounded away from zero");
    if (scenario_.process().kind == ProcessKind::ScalarUniform &&
        estimator_.seminorm.kind == SemiNormKind::DerivL2)
        throw ValidationError(
            "experiment: the derivative semi-norm is degenerate on constant curves; "
            "pick l2 or sup for the scalar process");
    const auto seeds = replication_seeds();
    std::unordered_set<std::uint64_t> seen(seeds.begin(), seeds.end());
    if (seen.size() != seeds.size())
        throw ValidationError("experiment: derived replication seeds collide; change master_seed");
}

std::vector<std::uint64_t> ExperimentConfig::replication_seeds() const {
    std::vector<std::uint64_t> seeds(replications_);
    for (std::size_t r = 0; r < replications_; ++r)
        seeds[r] = derive_seed(master_seed_, kReplicationStream, r);
    return seeds;
}

json ExperimentConfig::to_json() const {
    json j;
    j["schema_version"] = 1;
    j["scenario"] = scenario_.to_json();
    j["estimator"] = estimator_.to_json();
    j["n_grid"] = n_grid_;
    j["replications"] = replications_;
    j["master_seed"] = master_seed_;
    j["study"] = to_string(study_);
    j["slack"] = json{{"as_bound_factor", slack_.as_bound_factor},
                      {"variance_rtol", slack_.variance_rtol},
                      {"undefined_abort_fraction", slack_.undefined_abort_fraction}};
    j["threads"] = threads_;
    return j;
}

namespace {

// The scenario can sit inline under "scenario" or in its own file named by
// "scenario_file" (path relative to the working directory).
Scenario scenario_from_config(const json& j) {
    if (j.contains("scenario")) return Scenario::from_json(j.at("scenario"));
    if (j.contains("scenario_file")) {
        const auto path = j.at("scenario_file").get<std::string>();
        std::ifstream in(path);
        if (!in) throw IoError("cannot open scenario file " + path);
        try {
            return Scenario::from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw ValidationError(path + ": " + e.what());
        }
    }
    throw ValidationError("experiment: needs 'scenario' or 'scenario_file'");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j,
                                             std::optional<StudyKind> study_override) {
    try {
        if (j.value("schema_version", 0) != 1)
            throw ValidationError("experiment: unsupported schema_version");
        SlackConfig slack;
        if (j.contains("slack")) {
            slack.as_bound_factor = j.at("slack").value("as_bound_factor", 1.5);
            slack.variance_rtol = j.at("slack").value("variance_rtol", 0.25);
            slack.undefined_abort_fraction =
                j.at("slack").value("undefined_abort_fraction", 0.2);
        }
        StudyKind study = StudyKind::MseDecay;
        if (study_override) {
            study = *study_override;
        } else if (j.contains("study")) {
            study = study_from_string(j.at("study").get<std::string>());
        } else {
            throw ValidationError("experiment: no study named in config or on the command line");
        }
        return ExperimentConfig(scenario_from_config(j),
                                EstimatorSpec::from_json(j.at("estimator")),
                                j.at("n_grid").get<std::vector<std::size_t>>(),
                                j.at("replications").get<std::size_t>(),
                                j.at("master_seed").get<std::uint64_t>(), study, slack,
                                j.value("threads", 0u));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment: malformed JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Replication engine
// ---------------------------------------------------------------------------

namespace {

struct CellRecord {
    bool defined = false;
    double r_hat = 0.0;
    double f_n = 0.0;
    double phi_n = 0.0;
};

struct RepResult {
    std::vector<CellRecord> cells;  // [n_index * n_points + point]
    double gamma_hat = std::numeric_limits<double>::quiet_NaN();
};

std::vector<RepResult> run_replications(const ExperimentConfig& cfg) {
    const auto queries = cfg.scenario().query_curves();
    const std::size_t n_points = queries.size();
    const std::size_t max_n = cfg.n_grid().back();
    const auto seeds = cfg.replication_seeds();

    std::vector<RepResult> out(cfg.replications());
    parallel_for(cfg.replications(), cfg.threads(), [&](std::size_t r) {
        const auto data = cfg.scenario().generate_with_seed(seeds[r], max_n);
        RepResult& res = out[r];
        EstimatorConfig ecfg =
            resolve_estimator(cfg.estimator(), data, queries.front(), &res.gamma_hat);
        EstimatorState state = register_points(ecfg, queries);
        res.cells.resize(cfg.n_grid().size() * n_points);
        std::size_t next_checkpoint = 0;
        for (std::size_t i = 0; i < max_n; ++i) {
            state.update(data[i].first, data[i].second);
            if (i + 1 == cfg.n_grid()[next_checkpoint]) {
                for (std::size_t p = 0; p < n_points; ++p) {
                    CellRecord& cell = res.cells[next_checkpoint * n_points + p];
                    const auto value = state.evaluate(p);
                    cell.defined = value.has_value();
                    cell.r_hat = value.value_or(0.0);
                    cell.f_n = state.density_component(p);
                    cell.phi_n = state.response_component(p);
                }
                ++next_checkpoint;
            }
        }
    });
    return out;
}

// Aborts the study when any cell has too many undefined estimates; that is a
// bandwidth problem, not a statistics problem.
void enforce_defined_fraction(const ExperimentConfig& cfg, const std::vector<RepResult>& reps,
                              std::size_t n_points) {
    for (std::size_t k = 0; k < cfg.n_grid().size(); ++k) {
        for (std::size_t p = 0; p < n_points; ++p) {
            std::size_t undefined = 0;
            for (const auto& rep : reps)
                if (!rep.cells[k * n_points + p].defined) ++undefined;
            const double frac =
                static_cast<double>(undefined) / static_cast<double>(reps.size());
            if (frac > cfg.slack().undefined_abort_fraction) {
                throw InfeasibleError(
                    "study aborted: " + format_double(100.0 * frac) + "% of replications at n = " +
                    std::to_string(cfg.n_grid()[k]) + ", point " + std::to_string(p) +
                    " produced no defined estimate; the bandwidth schedule is too small for the "
                    "sample (h1 = " + format_double(cfg.estimator().schedule.h1()) + ")");
            }
        }
    }
}

// Analytic inputs every predicted column is built from. They come from the
// scenario and the configuration alone; nothing empirical is allowed in.
struct TheoryContext {
    double gamma = 1.0;
    double f1 = 1.0;
    double sigma2 = 0.0;
    std::vector<double> r_chi;
    std::vector<double> zeta_prime;
    AsymptoticConstants consts;
    double phi_of(double h) const { return std::pow(h, gamma); }
};

TheoryContext build_theory(const ExperimentConfig& cfg) {
    const auto& scenario = cfg.scenario();
    const auto queries = scenario.query_curves();
    TheoryContext t;
    const auto gamma = scenario.smallball_gamma_closed_form();
    if (!gamma)
        throw ValidationError(
            "study: theoretical predictions need a scenario with an analytic small-ball "
            "exponent; only the scalar uniform process provides one");
    t.gamma = *gamma;
    t.sigma2 = scenario.sigma_eps() * scenario.sigma_eps();
    for (const auto& q : queries) {
        const auto f1 = scenario.f1_closed_form(q);
        if (!f1)
            throw ValidationError(
                "study: query point has no analytic functional density; use interior constant "
                "levels");
        if (t.r_chi.empty()) {
            t.f1 = *f1;
        } else if (*f1 != t.f1) {
            throw ValidationError("study: query points disagree on the functional density");
        }
        t.r_chi.push_back(scenario.true_regression(q));
        const auto zeta = scenario.zeta_prime_closed_form(q);
        if (zeta) {
            t.zeta_prime.push_back(*zeta);
        } else {
            t.zeta_prime.push_back(
                estimate_zeta_prime(scenario, q, cfg.estimator().seminorm, 20000).slope);
        }
    }
    t.consts = asymptotic_constants(cfg.estimator().kernel, TauModel::power_law(t.gamma),
                                    cfg.estimator().schedule, cfg.estimator().ell);
    return t;
}

std::optional<TheoryContext> try_build_theory(const ExperimentConfig& cfg) {
    try {
        return build_theory(cfg);
    } catch (const ValidationError&) {
        return std::nullopt;
    } catch (const PrecisionError&) {
        return std::nullopt;
    }
}

// Variance and bias studies compare the recorded components against the
// closed forms, which are stated for weights built from the true F. That
// requires an explicit power-law model with the scenario's exponent; the
// constant C only rescales both components and is divided out.
double component_rescale(const ExperimentConfig& cfg, const TheoryContext& theory) {
    const auto& sb = cfg.estimator().smallball;
    if (sb.plugin || !sb.model || sb.model->kind() != SmallBallKind::PowerLaw ||
        std::abs(sb.model->gamma() - theory.gamma) > 1e-9) {
        throw ValidationError(
            "study: component-level checks need an explicit power-law small-ball model with "
            "the scenario's exponent (gamma = " + format_double(theory.gamma) + ")");
    }
    return sb.model->c() / theory.f1;
}

std::optional<double> ratio_of(std::optional<double> emp, std::optional<double> pred) {
    if (!emp || !pred || *pred == 0.0) return std::nullopt;
    return *emp / *pred;
}

void push_summary(Report& report, std::size_t n, std::size_t p, std::string metric,
                  std::optional<double> emp, std::optional<double> pred) {
    SummaryRow row;
    row.n = n;
    row.point = p;
    row.metric = std::move(metric);
    row.empirical = emp;
    row.predicted = pred;
    row.ratio = ratio_of(emp, pred);
    report.summary.push_back(std::move(row));
}

json provenance_for(const ExperimentConfig& cfg) {
    json j;
    j["tool"] = "funrec";
    j["schema_version"] = 1;
    j["study"] = to_string(cfg.study());
    j["config"] = cfg.to_json();
    j["derived"] = json{{"replication_seeds", cfg.replication_seeds()},
                        {"git_describe", git_describe_string()}};
    return j;
}

double undefined_fraction(const std::vector<RepResult>& reps, std::size_t cell_index) {
    std::size_t undefined = 0;
    for (const auto& rep : reps)
        if (!rep.cells[cell_index].defined) ++undefined;
    return static_cast<double>(undefined) / static_cast<double>(reps.size());
}

// Plug-in runs expose the per-replication exponent fits and serialize the
// first replication's model next to the other outputs.
void record_plugin_fits(Report& report, const ExperimentConfig& cfg,
                        const std::vector<RepResult>& reps) {
    if (!cfg.estimator().smallball.plugin) return;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        report.results.push_back(
            {cfg.n_grid().back(), r, 0, "gamma_hat", reps[r].gamma_hat});
    }
    report.fitted_smallball_json =
        SmallBallModel::power_law(1.0, reps.front().gamma_hat).to_json_string();
}

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

Report run_mse_decay(const ExperimentConfig& cfg) {
    const auto reps = run_replications(cfg);
    const auto queries = cfg.scenario().query_curves();
    const std::size_t n_points = queries.size();
    enforce_defined_fraction(cfg, reps, n_points);
    const auto theory = try_build_theory(cfg);

    Report report;
    report.study = to_string(cfg.study());
    report.provenance = provenance_for(cfg);

    std::vector<std::vector<double>> emp_mse(n_points), pred_mse(n_points), used_n(n_points);

    for (std::size_t k = 0; k < cfg.n_grid().size(); ++k) {
        const std::size_t n = cfg.n_grid()[k];
        const double h_n = cfg.estimator().schedule.h(n);
        for (std::size_t p = 0; p < n_points; ++p) {
            const double truth = cfg.scenario().true_regression(queries[p]);
            std::vector<double> sq;
            for (std::size_t r = 0; r < reps.size(); ++r) {
                const auto& cell = reps[r].cells[k * n_points + p];
                report.results.push_back(
                    {n, r, p, "defined", cell.defined ? 1.0 : 0.0});
                if (!cell.defined) continue;
                const double err = cell.r_hat - truth;
                sq.push_back(err * err);
                report.results.push_back({n, r, p, "sq_error", err * err});
            }
            std::optional<double> emp, pred;
            double se = 0.0;
            if (!sq.empty()) emp = mean(sq);
            if (sq.size() >= 2)
                se = std::sqrt(sample_variance(sq) / static_cast<double>(sq.size()));
            if (theory) {
                pred = predict_mse(theory->consts, theory->zeta_prime[p], theory->sigma2,
                                   theory->f1, static_cast<double>(n), h_n, theory->phi_of(h_n));
            }
            push_summary(report, n, p, "mse", emp, pred);
            push_summary(report, n, p, "undefined_frac",
                         undefined_fraction(reps, k * n_points + p), std::nullopt);
            if (emp && *emp > 0.0) {
                emp_mse[p].push_back(std::log(*emp));
                used_n[p].push_back(std::log(static_cast<double>(n)));
                if (pred && *pred > 0.0) pred_mse[p].push_back(std::log(*pred));
                report.plots.push_back({"empirical_mse", p, static_cast<double>(n), *emp, se});
            }
            if (pred)
                report.plots.push_back({"predicted_mse", p, static_cast<double>(n), *pred, 0.0});
        }
    }

    for (std::size_t p = 0; p < n_points; ++p) {
        std::optional<double> emp_slope, pred_slope;
        if (used_n[p].size() >= 2) emp_slope = fit_line(used_n[p], emp_mse[p]).slope;
        if (pred_mse[p].size() == used_n[p].size() && used_n[p].size() >= 2)
            pred_slope = fit_line(used_n[p], pred_mse[p]).slope;
        push_summary(report, cfg.n_grid().back(), p, "log_slope", emp_slope, pred_slope);
    }
    record_plugin_fits(report, cfg, reps);
    return report;
}

Report run_variance_check(const ExperimentConfig& cfg) {
    const auto theory = build_theory(cfg);
    const double rescale = component_rescale(cfg, theory);
    const auto reps = run_replications(cfg);
    const auto queries = cfg.scenario().query_curves();
    const std::size_t n_points = queries.size();
    enforce_defined_fraction(cfg, reps, n_points);

    Report report;
    report.study = to_string(cfg.study());
    report.provenance = provenance_for(cfg);

    for (std::size_t k = 0; k < cfg.n_grid().size(); ++k) {
        const std::size_t n = cfg.n_grid()[k];
        const double h_n = cfg.estimator().schedule.h(n);
        const double phi_hn = theory.phi_of(h_n);
        for (std::size_t p = 0; p < n_points; ++p) {
            std::vector<double> fs, phis;
            fs.reserve(reps.size());
            phis.reserve(reps.size());
            for (std::size_t r = 0; r < reps.size(); ++r) {
                const auto& cell = reps[r].cells[k * n_points + p];
                const double f_true = cell.f_n * rescale;
                const double phi_true = cell.phi_n * rescale;
                fs.push_back(f_true);
                phis.push_back(phi_true);
                report.results.push_back({n, r, p, "defined", cell.defined ? 1.0 : 0.0});
                report.results.push_back({n, r, p, "f_n", f_true});
                report.results.push_back({n, r, p, "phi_n", phi_true});
            }
            const auto pred =
                predict_second_order(theory.consts, theory.r_chi[p], theory.sigma2, theory.f1,
                                     static_cast<double>(n), phi_hn);
            const double var_f = sample_variance(fs);
            const double var_phi = sample_variance(phis);
            const double cov = sample_covariance(fs, phis);

            // t statistic of the covariance: mean of centered cross products
            // over its own standard error.
            const double mf = mean(fs);
            const double mphi = mean(phis);
            std::vector<double> products(fs.size());
            for (std::size_t r = 0; r < fs.size(); ++r)
                products[r] = (fs[r] - mf) * (phis[r] - mphi);
            const double t_stat =
                mean(products) /
                std::sqrt(sample_variance(products) / static_cast<double>(products.size()));

            push_summary(report, n, p, "var_fn", var_f, pred.var_fn);
            push_summary(report, n, p, "var_phin", var_phi, pred.var_phin);
            push_summary(report, n, p, "cov", cov, pred.cov_n);
            push_summary(report, n, p, "cov_tstat", t_stat, std::nullopt);
            push_summary(report, n, p, "var_fn_within_slack",
                         std::abs(var_f / pred.var_fn - 1.0) <= cfg.slack().variance_rtol
                             ? 1.0
                             : 0.0,
                         std::nullopt);
            push_summary(report, n, p, "undefined_frac",
                         undefined_fraction(reps, k * n_points + p), std::nullopt);

            report.plots.push_back(
                {"var_fn_empirical", p, static_cast<double>(n), var_f, 0.0});
            report.plots.push_back(
                {"var_fn_predicted", p, static_cast<double>(n), pred.var_fn, 0.0});
            report.plots.push_back(
                {"var_phin_empirical", p, static_cast<double>(n), var_phi, 0.0});
            report.plots.push_back(
                {"var_phin_predicted", p, static_cast<double>(n), pred.var_phin, 0.0});
        }
    }
    record_plugin_fits(report, cfg, reps);
    return report;
}

Report run_as_bound_check(const ExperimentConfig& cfg) {
    if (!(cfg.estimator().schedule.decay() > 0.5)) {
        throw InfeasibleError(
            "as-bound-check requires n*h_n^2 -> 0; with h_i = h1*i^{-a} this means a > 1/2, "
            "got a = " + format_double(cfg.estimator().schedule.decay()));
    }
    const auto theory = build_theory(cfg);
    const auto reps = run_replications(cfg);
    const auto queries = cfg.scenario().query_curves();
    const std::size_t n_points = queries.size();
    enforce_defined_fraction(cfg, reps, n_points);

    Report report;
    report.study = to_string(cfg.study());
    report.provenance = provenance_for(cfg);

    const double bound =
        (2.0 / theory.consts.m1) * (1.0 + v_ell(theory.consts, theory.sigma2, theory.f1));
    const double slack_bound = cfg.slack().as_bound_factor * bound;

    for (std::size_t k = 0; k < cfg.n_grid().size(); ++k) {
        const std::size_t n = cfg.n_grid()[k];
        const double h_n = cfg.estimator().schedule.h(n);
        const double scale =
            std::sqrt(static_cast<double>(n) * theory.phi_of(h_n) /
                      std::log(static_cast<double>(n)));
        for (std::size_t p = 0; p < n_points; ++p) {
            std::vector<double> ds;
            std::size_t exceed = 0;
            for (std::size_t r = 0; r < reps.size(); ++r) {
                const auto& cell = reps[r].cells[k * n_points + p];
                report.results.push_back({n, r, p, "defined", cell.defined ? 1.0 : 0.0});
                if (!cell.defined) continue;
                const double d = scale * std::abs(cell.r_hat - theory.r_chi[p]);
                ds.push_back(d);
                if (d > slack_bound) ++exceed;
                report.results.push_back({n, r, p, "d_n", d});
            }
            std::optional<double> d_mean, d_max, exceed_frac;
            if (!ds.empty()) {
                d_mean = mean(ds);
                d_max = *std::max_element(ds.begin(), ds.end());
                exceed_frac = static_cast<double>(exceed) / static_cast<double>(ds.size());
            }
            push_summary(report, n, p, "d_mean", d_mean, std::nullopt);
            push_summary(report, n, p, "d_max", d_max, bound);
            push_summary(report, n, p, "exceed_frac", exceed_frac, std::nullopt);
            push_summary(report, n, p, "undefined_frac",
                         undefined_fraction(reps, k * n_points + p), std::nullopt);
            if (d_mean)
                report.plots.push_back({"d_mean", p, static_cast<double>(n), *d_mean, 0.0});
            report.plots.push_back({"as_bound", p, static_cast<double>(n), bound, 0.0});
            report.plots.push_back(
                {"slack_bound", p, static_cast<double>(n), slack_bound, 0.0});
        }
    }
    record_plugin_fits(report, cfg, reps);
    return report;
}

Report run_bias_check(const ExperimentConfig& cfg) {
    const auto theory = build_theory(cfg);
    component_rescale(cfg, theory);  // validates the model; the factor cancels in the ratio
    const auto reps = run_replications(cfg);
    const auto queries = cfg.scenario().query_curves();
    const std::size_t n_points = queries.size();
    enforce_defined_fraction(cfg, reps, n_points);

    Report report;
    report.study = to_string(cfg.study());
    report.provenance = provenance_for(cfg);

    for (std::size_t k = 0; k < cfg.n_grid().size(); ++k) {
        const std::size_t n = cfg.n_grid()[k];
        const double h_n = cfg.estimator().schedule.h(n);
        for (std::size_t p = 0; p < n_points; ++p) {
            std::vector<double> fs, phis;
            for (std::size_t r = 0; r < reps.size(); ++r) {
                const auto& cell = reps[r].cells[k * n_points + p];
                fs.push_back(cell.f_n);
                phis.push_back(cell.phi_n);
                report.results.push_back({n, r, p, "defined", cell.defined ? 1.0 : 0.0});
                report.results.push_back({n, r, p, "f_n", cell.f_n});
                report.results.push_back({n, r, p, "phi_n", cell.phi_n});
            }
            // Lemma-style estimand: ratio of means, not mean of ratios.
            const double emp = mean(phis) / mean(fs) - theory.r_chi[p];
            const double pred = predict_bias(theory.consts, theory.zeta_prime[p], h_n);
            push_summary(report, n, p, "bias", emp, pred);
            push_summary(report, n, p, "undefined_frac",
                         undefined_fraction(reps, k * n_points + p), std::nullopt);
            report.plots.push_back({"bias_empirical", p, static_cast<double>(n), emp, 0.0});
            report.plots.push_back({"bias_predicted", p, static_cast<double>(n), pred, 0.0});
        }
    }
    record_plugin_fits(report, cfg, reps);
    return report;
}

Report run_constants_study(const ExperimentConfig& cfg) {
    const auto gamma = cfg.scenario().smallball_gamma_closed_form();
    if (!gamma)
        throw ValidationError(
            "constants study: the scenario has no analytic small-ball exponent");
    ConstantsRequest req;
    req.kernel = cfg.estimator().kernel;
    req.tau = TauModel::power_law(*gamma);
    req.schedule = cfg.estimator().schedule;
    req.ell = cfg.estimator().ell;
    req.r_values = {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};

    Report report;
    report.study = to_string(cfg.study());
    report.provenance = provenance_for(cfg);
    report.summary = constants_table(req);
    return report;
}

}  // namespace

Report run_study(const ExperimentConfig& cfg) {
    switch (cfg.study()) {
        case StudyKind::MseDecay: return run_mse_decay(cfg);
        case StudyKind::VarianceCheck: return run_variance_check(cfg);
        case StudyKind::AsBoundCheck: return run_as_bound_check(cfg);
        case StudyKind::BiasCheck: return run_bias_check(cfg);
        case StudyKind::Constants: return run_constants_study(cfg);
    }
    throw ValidationError("run_study: unknown study kind");
}

// ---------------------------------------------------------------------------
// Rendering and emission
// ---------------------------------------------------------------------------

namespace {

std::string cell_or_empty(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

}  // namespace

std::string render_results_csv(const Report& report) {
    std::string out = "study,n,replication,point,metric,value\n";
    for (const auto& row : report.results) {
        out += report.study;
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.rep);
        out += ',';
        out += std::to_string(row.point);
        out += ',';
        out += row.metric;
        out += ',';
        out += format_double(row.value);
        out += '\n';
    }
    return out;
}

std::string render_summary_csv(const Report& report) {
    std::string out = "study,n,point,metric,empirical,predicted,ratio\n";
    for (const auto& row : report.summary) {
        out += report.study;
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.point);
        out += ',';
        out += row.metric;
        out += ',';
        out += cell_or_empty(row.empirical);
        out += ',';
        out += cell_or_empty(row.predicted);
        out += ',';
        out += cell_or_empty(row.ratio);
        out += '\n';
    }
    return out;
}

std::string render_plots_csv(const Report& report) {
    std::string out = "study,series,point,x,y,y_err\n";
    for (const auto& row : report.plots) {
        out += report.study;
        out += ',';
        out += row.series;
        out += ',';
        out += std::to_string(row.point);
        out += ',';
        out += format_double(row.x);
        out += ',';
        out += format_double(row.y);
        out += ',';
        out += format_double(row.y_err);
        out += '\n';
    }
    return out;
}

void prepare_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".funrec_write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw IoError("output directory " + dir.string() + " is not writable");
        out << "ok";
    }
    std::filesystem::remove(probe, ec);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void emit_report(const Report& report, const std::filesystem::path& dir) {
    prepare_output_dir(dir);
    write_file(dir / "results.csv", render_results_csv(report));
    write_file(dir / "summary.csv", render_summary_csv(report));
    write_file(dir / "plots.csv", render_plots_csv(report));
    write_file(dir / "config.json", report.provenance.dump(2) + "\n");
    if (report.fitted_smallball_json)
        write_file(dir / "smallball.json", *report.fitted_smallball_json + "\n");
}

const SummaryRow* find_summary(const Report& report, std::size_t n, std::size_t point,
                               const std::string& metric) {
    for (const auto& row : report.summary) {
        if (row.n == n && row.point == point && row.metric == metric) return &row;
    }
    return nullptr;
}

ConstantsRequest constants_request_from_json(const nlohmann::json& j) {
    try {
        ConstantsRequest req;
        req.kernel = kernel_from_json(j.at("kernel"));
        const auto& tj = j.at("tau");
        const auto kind = tj.at("kind").get<std::string>();
        if (kind == "power_law") {
            req.tau = TauModel::power_law(tj.at("gamma").get<double>());
        } else if (kind == "custom") {
            req.tau = TauModel::custom(tj.at("s").get<std::vector<double>>(),
                                       tj.at("tau").get<std::vector<double>>());
        } else {
            throw ValidationError("unknown tau kind: " + kind);
        }
        req.schedule = schedule_from_json(j.at("schedule"));
        req.ell = j.at("ell").get<double>();
        req.r_values = j.value("r_values", std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
        return req;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("constants: malformed JSON: ") + e.what());
    }
}

std::vector<SummaryRow> constants_table(const ConstantsRequest& req) {
    std::vector<SummaryRow> rows;
    const MConstants m = m_constants(req.kernel, req.tau);
    const auto pure = [&rows](std::string metric, std::optional<double> value) {
        SummaryRow row;
        row.metric = std::move(metric);
        row.predicted = value;
        rows.push_back(std::move(row));
    };
    pure("M0", m.m0);
    pure("M1", m.m1);
    pure("M2", m.m2);
    if (req.tau.is_power_law()) {
        const double gamma = req.tau.gamma();
        try {
            pure("alpha[" + format_double(req.ell) + "]",
                 alpha_limit(req.schedule, gamma, req.ell));
        } catch (const DivergenceError&) {
            pure("alpha[" + format_double(req.ell) + "]", std::nullopt);
        }
        for (double r : req.r_values) {
            try {
                pure("beta[" + format_double(r) + "]", beta_limit(req.schedule, gamma, r));
            } catch (const DivergenceError&) {
                pure("beta[" + format_double(r) + "]", std::nullopt);
            }
        }
    }
    return rows;
}

}  // namespace funrec
