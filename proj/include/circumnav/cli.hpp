#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "circumnav/analysis.hpp"
#include "circumnav/errors.hpp"
#include "circumnav/scenario_io.hpp"
#include "circumnav/simulation.hpp"
#include "circumnav/trajectory_io.hpp"

namespace circumnav {

// Exit codes shared by all subcommands: 0 success, 1 operational error
// (bad input, I/O, simulation failure), 2 expectation or certificate
// failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitExpectationFailed = 2;

struct RunOptions {
    std::string scenario_path;
    std::string out_dir = ".";
    double dt_override = 0.0;        // <= 0: keep the file's dt
    std::int64_t seed_override = -1; // < 0: keep the file's seed
};

/// `run`: simulate a scenario file and write trajectory.csv, events.csv and
/// report.txt into the output directory.
inline int cmd_run(const RunOptions& options, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    ScenarioFile file;
    try {
        file = load_scenario(options.scenario_path);
        if (options.dt_override > 0.0) file.scenario.dt = options.dt_override;
        if (options.seed_override >= 0)
            file.scenario.seed = static_cast<std::uint64_t>(options.seed_override);
        file.scenario.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    TrajectoryLog log;
    try {
        log = run(file.scenario);
    } catch (const std::exception& e) {
        err << "simulation error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        std::filesystem::create_directories(options.out_dir);
        const std::vector<CsvRow> rows = to_rows(log);

        std::ofstream traj(std::filesystem::path(options.out_dir) / "trajectory.csv",
                           std::ios::binary);
        if (!traj) throw std::runtime_error("cannot write trajectory.csv");
        write_trajectory_csv(rows, traj);

        std::ofstream events(std::filesystem::path(options.out_dir) / "events.csv",
                             std::ios::binary);
        if (!events) throw std::runtime_error("cannot write events.csv");
        write_events_csv(log, events);

        const RunReport report = build_run_report(rows, file.expectations);
        const std::string text = format_run_report(report);
        std::ofstream report_stream(std::filesystem::path(options.out_dir) / "report.txt",
                                    std::ios::binary);
        if (!report_stream) throw std::runtime_error("cannot write report.txt");
        report_stream << text;
        out << text;
        return report.pass() ? kExitOk : kExitExpectationFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

struct ValidateOptions {
    int n_max = 10;
    int trials = 100;
    std::uint64_t seed = 0;
    bool inject_fault = false;  // debug hook: corrupt one A entry first
};

/// `validate`: run the spectral and order certificates over random positive
/// utility vectors for every ring size 2..n_max.
inline int cmd_validate(const ValidateOptions& options, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    if (options.n_max < 2 || options.trials < 1) {
        err << "usage error: require --n-max >= 2 and --trials >= 1\n";
        return kExitError;
    }

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> draw_mu(0.1, 10.0);

    double worst_left = 0.0, worst_b = 0.0, worst_row = 0.0, worst_limit = 0.0;
    double worst_off_diag = std::numeric_limits<double>::infinity();
    double worst_exp_entry = std::numeric_limits<double>::infinity();
    double worst_col = 0.0;

    for (int n = 2; n <= options.n_max; ++n) {
        for (int trial = 0; trial < options.trials; ++trial) {
            std::vector<double> mu(static_cast<std::size_t>(n));
            for (double& m : mu) m = draw_mu(rng);

            SpectralCertificate spectral = verify_consensus_limit(mu);
            OrderCertificate order = build_m_delta(mu);
            if (options.inject_fault && n == 2 && trial == 0) {
                // flip the sign of one adjacency entry; every residual that
                // depends on A must light up
                Matrix broken = compact_form(mu).a;
                broken(0, 1) = -broken(0, 1);
                const std::vector<double> w = left_eigenvector(mu);
                double res = 0.0;
                for (std::size_t j = 0; j < mu.size(); ++j) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < mu.size(); ++i)
                        s += w[i] * ((i == j ? 1.0 : 0.0) - broken(i, j));
                    res = std::max(res, std::abs(s));
                }
                spectral.residual_left = res;
                spectral.pass = spectral.residual_left < kSpectralResidualTol;
            }

            worst_left = std::max(worst_left, spectral.residual_left);
            worst_b = std::max(worst_b, spectral.residual_b);
            worst_row = std::max(worst_row, spectral.row_sum_error);
            worst_limit = std::max(worst_limit, spectral.limit_error);
            worst_off_diag = std::min(worst_off_diag, order.min_off_diagonal);
            worst_exp_entry = std::min(worst_exp_entry, order.min_exp_entry);
            worst_col = std::max(worst_col, order.column_sum_error);

            if (!spectral.pass || !order.pass) {
                err << "certificate failure: n=" << n << " seed=" << options.seed
                    << " trial=" << trial << " mu=[";
                for (std::size_t i = 0; i < mu.size(); ++i)
                    err << (i ? " " : "") << mu[i];
                err << "]\n";
                err << "  " << spectral.to_string() << "\n";
                err << "  " << order.to_string() << "\n";
                return kExitExpectationFailed;
            }
        }
        out << "n=" << n << ": " << options.trials << " trials ok\n";
    }

    out << "spectral: max |w_l^T L|=" << worst_left << " max |w_l^T b|=" << worst_b
        << " max row-sum err=" << worst_row << " max limit err=" << worst_limit << "\n";
    out << "order: min off-diag=" << worst_off_diag << " min exp entry=" << worst_exp_entry
        << " max col-sum err=" << worst_col << "\n";
    out << "all certificates passed\n";
    return kExitOk;
}

struct ReportOptions {
    std::string csv_path;
    std::string scenario_path;  // optional, for the expectation section
};

/// `report`: rebuild the run report from an existing trajectory.csv.
inline int cmd_report(const ReportOptions& options, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    try {
        std::ifstream in(options.csv_path, std::ios::binary);
        if (!in) {
            err << "error: cannot open '" << options.csv_path << "'\n";
            return kExitError;
        }
        const std::vector<CsvRow> rows = read_trajectory_csv(in);
        std::vector<Expectation> expectations;
        if (!options.scenario_path.empty())
            expectations = load_scenario(options.scenario_path).expectations;
        const RunReport report = build_run_report(rows, expectations);
        out << format_run_report(report);
        return report.pass() ? kExitOk : kExitExpectationFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace circumnav
