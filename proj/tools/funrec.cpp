// Experiment runner for the recursive functional kernel regression library.
//
// Subcommands:
//   constants  print the kernel moment constants and Cesaro limits
//   simulate   draw a dataset from a scenario file and write it as CSV
//   run        execute a Monte Carlo study and emit CSV reports
//   fit        evaluate the estimator on a dataset at given query points
//
// Exit codes: 0 success, 2 configuration problem, 3 infeasible hypothesis,
// 4 I/O failure, 1 anything else.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "funrec/dataset_io.hpp"
#include "funrec/errors.hpp"
#include "funrec/experiment.hpp"
#include "funrec/numeric.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw funrec::IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw funrec::ValidationError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw funrec::IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw funrec::IoError("write failed for " + path);
}

int cmd_constants(const std::string& config_path, const std::string& csv_path) {
    const auto req = funrec::constants_request_from_json(load_json(config_path));
    const auto rows = funrec::constants_table(req);

    std::string csv = "name,value\n";
    for (const auto& row : rows) {
        const std::string value =
            row.predicted ? funrec::format_double(*row.predicted) : std::string{};
        std::cout << row.metric << " = " << (row.predicted ? value : "divergent") << "\n";
        csv += row.metric + "," + value + "\n";
    }
    if (!csv_path.empty()) write_text(csv_path, csv);
    return 0;
}

int cmd_simulate(const std::string& scenario_path, std::size_t n, const std::string& out_path) {
    const auto scenario = funrec::Scenario::from_json(load_json(scenario_path));
    const auto data = scenario.generate(n);
    funrec::write_dataset_csv(out_path, data);
    std::cout << "wrote " << data.size() << " observations to " << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& study_name,
            const std::string& out_dir, unsigned threads_override) {
    std::optional<funrec::StudyKind> study;
    if (!study_name.empty()) study = funrec::study_from_string(study_name);
    auto cfg = funrec::ExperimentConfig::from_json(load_json(config_path), study);
    if (threads_override != 0) {
        cfg = funrec::ExperimentConfig(cfg.scenario(), cfg.estimator(), cfg.n_grid(),
                                       cfg.replications(), cfg.master_seed(), cfg.study(),
                                       cfg.slack(), threads_override);
    }
    funrec::prepare_output_dir(out_dir);
    const auto report = funrec::run_study(cfg);
    funrec::emit_report(report, out_dir);

    for (const auto& row : report.summary) {
        std::cout << report.study << " n=" << row.n << " point=" << row.point << " "
                  << row.metric;
        if (row.empirical) std::cout << " empirical=" << funrec::format_double(*row.empirical);
        if (row.predicted) std::cout << " predicted=" << funrec::format_double(*row.predicted);
        if (row.ratio) std::cout << " ratio=" << funrec::format_double(*row.ratio);
        std::cout << "\n";
    }
    std::cout << "wrote " << out_dir << "/{results,summary,plots}.csv and config.json\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& points_path,
            const std::string& config_path, const std::string& out_path,
            const std::string& model_out_path) {
    const auto spec = funrec::EstimatorSpec::from_json(load_json(config_path));
    const auto dataset = funrec::read_dataset_csv(data_path);
    const auto points = funrec::read_points_csv(points_path);
    if (!dataset.grid->compatible_with(*points.grid))
        throw funrec::StructuralError("dataset and points files use different grids");

    double gamma_hat = 0.0;
    const auto ecfg =
        funrec::resolve_estimator(spec, dataset.observations, points.points.front(), &gamma_hat);
    auto state = funrec::register_points(ecfg, points.points);
    for (const auto& [x, y] : dataset.observations) state.update(x, y);

    std::string csv = "point,estimate,defined,f_n,phi_n\n";
    for (std::size_t j = 0; j < state.num_points(); ++j) {
        const auto est = state.evaluate(j);
        csv += std::to_string(j) + ",";
        csv += (est ? funrec::format_double(*est) : std::string{}) + ",";
        csv += (est ? "1" : "0");
        csv += "," + funrec::format_double(state.density_component(j));
        csv += "," + funrec::format_double(state.response_component(j)) + "\n";
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    }
    if (!model_out_path.empty()) {
        write_text(model_out_path, ecfg.smallball().to_json_string() + "\n");
        std::cout << "wrote " << model_out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recursive kernel regression for functional data"};
    app.require_subcommand(1);

    std::string config_path, csv_path, scenario_path, out_path, study_name;
    std::string data_path, points_path, model_out_path;
    std::size_t n = 0;
    unsigned threads = 0;

    auto* constants = app.add_subcommand("constants", "print moment constants and limits");
    constants->add_option("--config", config_path, "constants config JSON")->required();
    constants->add_option("--csv", csv_path, "also write a machine-readable CSV");

    auto* simulate = app.add_subcommand("simulate", "draw a dataset from a scenario");
    simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
    simulate->add_option("--n", n, "number of observations")->required();
    simulate->add_option("--out", out_path, "output CSV path")->required();

    auto* run = app.add_subcommand("run", "execute a Monte Carlo study");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--study", study_name, "study name (overrides the config)");
    run->add_option("--out", out_path, "output directory")->required();
    run->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* fit = app.add_subcommand("fit", "run the estimator over a dataset");
    fit->add_option("--data", data_path, "dataset CSV")->required();
    fit->add_option("--points", points_path, "query points CSV")->required();
    fit->add_option("--config", config_path, "estimator config JSON")->required();
    fit->add_option("--out", out_path, "output CSV (default stdout)");
    fit->add_option("--model-out", model_out_path, "write the resolved small-ball model JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (constants->parsed()) return cmd_constants(config_path, csv_path);
        if (simulate->parsed()) return cmd_simulate(scenario_path, n, out_path);
        if (run->parsed()) return cmd_run(config_path, study_name, out_path, threads);
        if (fit->parsed()) return cmd_fit(data_path, points_path, config_path, out_path,
                                          model_out_path);
    } catch (const funrec::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const funrec::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const funrec::PrecisionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const funrec::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const funrec::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
