#include "mfgc/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Mean field games with common price: solver, verifier and plot export"};
    app.require_subcommand(1);

    mfgc::SolveCommand solve;
    auto* solve_cmd = app.add_subcommand("solve", "solve the system described by a JSON config");
    solve_cmd->add_option("--config", solve.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--out", solve.out_dir, "output directory (default: output.dir from the config)");
    solve_cmd->add_flag("--force", solve.force, "solve even when model validation fails");
    solve_cmd->add_option("--refine-ladder", solve.refine_ladder,
                          "also solve L-1 refined levels (n x2, nt x4 per level) and report the gap per level")
        ->check(CLI::NonNegativeNumber);

    std::filesystem::path verify_dir;
    auto* verify_cmd = app.add_subcommand("verify", "re-check a finished run from its artifacts");
    verify_cmd->add_option("--run", verify_dir, "run directory")->required();

    std::filesystem::path plots_dir;
    auto* plots_cmd = app.add_subcommand("export-plots", "write plot-ready CSV tables for a run");
    plots_cmd->add_option("--run", plots_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mfgc::kExitOk : mfgc::kExitUsage;
    }

    if (*solve_cmd) return mfgc::cmd_solve(solve, std::cout, std::cerr);
    if (*verify_cmd) return mfgc::cmd_verify(verify_dir, std::cout, std::cerr);
    return mfgc::cmd_export_plots(plots_dir, std::cout, std::cerr);
}
