#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "porofem/cli.hpp"

namespace {

void add_common(CLI::App* cmd, porofem::cli::RunConfig& cfg)
{
    cmd->add_option("--res", cfg.resolutions, "Mesh resolution(s), intervals per side")
        ->delimiter(',')
        ->envname("POROFEM_RES");
    cmd->add_option("--delta", cfg.deltas, "Stabilization parameter(s)")->delimiter(',')->envname("POROFEM_DELTA");
    cmd->add_option("--dt", cfg.dt, "Time step")->envname("POROFEM_DT");
    cmd->add_option("--T", cfg.T, "Final time")->envname("POROFEM_T");
    cmd->add_option("--out", cfg.out, "Output directory")->envname("POROFEM_OUT");
    cmd->add_option("--vtk-every", cfg.vtk_every, "Write a VTK snapshot every k steps (0: final only)")
        ->envname("POROFEM_VTK_EVERY");
    cmd->add_option("--threshold", cfg.threshold, "Acceptance threshold of the subcommand")
        ->envname("POROFEM_THRESHOLD");
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace porofem::cli;
    CLI::App app{"Stabilized P1/P1/P0 Biot poroelasticity solver and benchmarks"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    auto* c2 = app.add_subcommand("converge2d", "Manufactured-solution convergence study on the unit square");
    auto* c3 = app.add_subcommand("converge3d", "Manufactured-solution convergence study on the unit cube");
    auto* cant = app.add_subcommand("cantilever", "Cantilever bracket pressure-oscillation test");
    auto* unc = app.add_subcommand("unconfined", "Unconfined compression against the Armstrong solution");
    auto* arm = app.add_subcommand("armstrong", "Export the Armstrong reference curve");
    auto* run = app.add_subcommand("run", "Run a problem described by a config file");
    run->add_option("config", config_path, "Config file")->required();
    for (auto* cmd : {c2, c3, cant, unc, arm, run}) add_common(cmd, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : invalid_arguments;
    }

    try {
        if (c2->parsed()) return cmd_converge(2, cfg, std::cout);
        if (c3->parsed()) return cmd_converge(3, cfg, std::cout);
        if (cant->parsed()) return cmd_cantilever(cfg, std::cout);
        if (unc->parsed()) return cmd_unconfined(cfg, std::cout);
        if (arm->parsed()) return cmd_armstrong(cfg, std::cout);
        if (run->parsed()) return cmd_run(config_path, cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return invalid_arguments;
}
