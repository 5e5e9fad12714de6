#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "resonance/run.hpp"

namespace {

void add_common_options(CLI::App* sub, resonance::RunOptions& opt) {
    sub->add_option("--scenario", opt.scenario_path, "Scenario JSON file")->required();
    sub->add_option("--format", opt.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", opt.out, "Output file (default: stdout)");
    sub->add_option("--e-min", opt.e_min, "Energy grid minimum");
    sub->add_option("--e-max", opt.e_max, "Energy grid maximum");
    sub->add_option("--e-count", opt.e_count, "Energy grid point count");
    sub->add_option("--t-max", opt.t_max, "Time grid maximum");
    sub->add_option("--t-count", opt.t_count, "Time grid point count");
    sub->add_option("--alpha-min", opt.a_min, "Coupling-scale grid minimum");
    sub->add_option("--alpha-max", opt.a_max, "Coupling-scale grid maximum");
    sub->add_option("--alpha-count", opt.a_count, "Coupling-scale grid point count");
    sub->add_option("--bins", opt.bins, "Bins per channel for the full-space reference");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resonance spectroscopy and decay dynamics of open quantum systems"};
    app.require_subcommand(1);

    resonance::RunOptions opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"spectrum", "Complex eigenvalues and eigenvector diagnostics at the probe energy"},
        {"fixedpoint", "Self-consistent resonance energy and width"},
        {"sweep", "Eigenvalue trajectories over a coupling-scale grid"},
        {"ep-locate", "Search a parameter box for an exceptional point"},
        {"smatrix", "Scattering matrix over an energy grid"},
        {"decay", "Population probability over a time grid"},
        {"rates", "Group and per-state decay rates over a time grid"},
        {"trap", "Width bifurcation and trapped-state averages over a coupling sweep"},
        {"oracle-compare", "Fixed-point width versus the discretized full-space fit"},
    };
    for (const auto& [name, description] : commands)
        add_common_options(app.add_subcommand(name, description), opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    opt.command = app.get_subcommands().front()->get_name();
    try {
        return resonance::run_cli(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
