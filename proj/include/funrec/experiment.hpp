#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "funrec/asymconst.hpp"
#include "funrec/estimator.hpp"
#include "funrec/scenario.hpp"

namespace funrec {

enum class StudyKind { MseDecay, VarianceCheck, AsBoundCheck, BiasCheck, Constants };

StudyKind study_from_string(const std::string& name);
const char* to_string(StudyKind kind);

// How the estimator obtains its small-ball model: an explicit model (oracle
// mode) or a power-law exponent fitted per replication on pilot distances to
// the first query point (plug-in mode, which fixes C = 1 since the ratio
// estimate cannot identify the constant anyway).
struct SmallBallSpec {
    bool plugin = false;
    std::optional<SmallBallModel> model;
    std::size_t n_pilot = 2000;
    double q_lo = 0.05;
    double q_hi = 0.5;
};

struct EstimatorSpec {
    double ell = 0.0;
    Kernel kernel = Kernel::uniform();
    SemiNorm seminorm{};
    BandwidthSchedule schedule{0.25, 0.25};
    SmallBallSpec smallball{};
    std::optional<Truncation> truncation{};

    nlohmann::json to_json() const;
    static EstimatorSpec from_json(const nlohmann::json& j);
};

// Resolve a spec against concrete data. Plug-in mode fits the exponent on the
// first min(n, n_pilot) observations; gamma_hat_out receives the fitted
// exponent when non-null.
EstimatorConfig resolve_estimator(const EstimatorSpec& spec, std::span<const LabeledCurve> data,
                                  const Curve& query, double* gamma_hat_out = nullptr);

// Tolerances applied to asymptotic statements; they absorb the dropped o(1)
// factors and are plain config values, overridable per experiment.
struct SlackConfig {
    double as_bound_factor = 1.5;
    double variance_rtol = 0.25;
    double undefined_abort_fraction = 0.2;
};

class ExperimentConfig {
public:
    ExperimentConfig(Scenario scenario, EstimatorSpec estimator, std::vector<std::size_t> n_grid,
                     std::size_t replications, std::uint64_t master_seed, StudyKind study,
                     SlackConfig slack = {}, unsigned threads = 0);

    const Scenario& scenario() const { return scenario_; }
    const EstimatorSpec& estimator() const { return estimator_; }
    const std::vector<std::size_t>& n_grid() const { return n_grid_; }
    std::size_t replications() const { return replications_; }
    std::uint64_t master_seed() const { return master_seed_; }
    StudyKind study() const { return study_; }
    const SlackConfig& slack() const { return slack_; }
    unsigned threads() const { return threads_; }

    std::vector<std::uint64_t> replication_seeds() const;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j,
                                      std::optional<StudyKind> study_override = std::nullopt);

private:
    Scenario scenario_;
    EstimatorSpec estimator_;
    std::vector<std::size_t> n_grid_;
    std::size_t replications_;
    std::uint64_t master_seed_;
    StudyKind study_;
    SlackConfig slack_;
    unsigned threads_;
};

struct ResultRow {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::size_t point = 0;
    std::string metric;
    double value = 0.0;
};

struct SummaryRow {
    std::size_t n = 0;
    std::size_t point = 0;
    std::string metric;
    std::optional<double> empirical;
    std::optional<double> predicted;
    std::optional<double> ratio;
};

struct PlotRow {
    std::string series;
    std::size_t point = 0;
    double x = 0.0;
    double y = 0.0;
    double y_err = 0.0;
};

struct Report {
    std::string study;
    std::vector<ResultRow> results;
    std::vector<SummaryRow> summary;
    std::vector<PlotRow> plots;
    nlohmann::json provenance;
    // Plug-in runs record the small-ball model fitted on the first
    // replication; emitted as smallball.json next to the other outputs.
    std::optional<std::string> fitted_smallball_json;
};

Report run_study(const ExperimentConfig& cfg);

std::string render_results_csv(const Report& report);
std::string render_summary_csv(const Report& report);
std::string render_plots_csv(const Report& report);

// Creates the directory and verifies it is writable; called before any
// computation starts.
void prepare_output_dir(const std::filesystem::path& dir);
// Writes results.csv, summary.csv, plots.csv and config.json.
void emit_report(const Report& report, const std::filesystem::path& dir);

const SummaryRow* find_summary(const Report& report, std::size_t n, std::size_t point,
                               const std::string& metric);

// Configuration for the `constants` subcommand: kernel, tau0, schedule, the
// weight exponent and a list of beta exponents to tabulate.
struct ConstantsRequest {
    Kernel kernel = Kernel::uniform();
    TauModel tau = TauModel::power_law(1.0);
    BandwidthSchedule schedule{0.25, 0.25};
    double ell = 0.0;
    std::vector<double> r_values{};
};

ConstantsRequest constants_request_from_json(const nlohmann::json& j);
// Divergent beta exponents get a row with an empty value.
std::vector<SummaryRow> constants_table(const ConstantsRequest& req);

}  // namespace funrec
