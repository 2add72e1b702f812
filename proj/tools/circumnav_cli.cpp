// Command-line front end: run scenario files, certify the ring-consensus
// properties, and rebuild reports from existing trajectory logs.

#include <CLI11.hpp>

#include "circumnav/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"utility-based circumnavigation simulator"};
    app.require_subcommand(1);

    circumnav::RunOptions run_options;
    CLI::App* run = app.add_subcommand("run", "simulate a scenario file");
    run->add_option("scenario", run_options.scenario_path, "scenario file (.scn)")->required();
    run->add_option("--out", run_options.out_dir, "output directory (default: .)");
    run->add_option("--dt", run_options.dt_override, "override the integrator step");
    run->add_option("--seed", run_options.seed_override, "override the noise seed");

    circumnav::ValidateOptions validate_options;
    CLI::App* validate =
        app.add_subcommand("validate", "run the spectral and order certificates");
    validate->add_option("--n-max", validate_options.n_max, "largest ring size (default 10)");
    validate->add_option("--trials", validate_options.trials,
                         "random utility vectors per ring size (default 100)");
    validate->add_option("--seed", validate_options.seed, "random seed");
    validate->add_flag("--inject-fault", validate_options.inject_fault,
                       "debug: corrupt one adjacency entry to exercise the failure path");

    circumnav::ReportOptions report_options;
    CLI::App* report = app.add_subcommand("report", "summarize an existing trajectory.csv");
    report->add_option("csv", report_options.csv_path, "trajectory.csv from a previous run")
        ->required();
    report->add_option("--scenario", report_options.scenario_path,
                       "scenario file, to re-check its declared expectations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : circumnav::kExitError;
    }

    if (run->parsed()) return circumnav::cmd_run(run_options);
    if (validate->parsed()) return circumnav::cmd_validate(validate_options);
    return circumnav::cmd_report(report_options);
}
