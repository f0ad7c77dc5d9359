#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mfgc {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitNonConvergence = 2,
    kExitVerifyFailed = 3,
};

struct SolveCommand {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    bool force = false;
    int refine_ladder = 0;  ///< number of levels; level i has n 2^i nodes per axis and nt 4^i steps
};

int cmd_solve(const SolveCommand& command, std::ostream& out, std::ostream& err);
int cmd_verify(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);
int cmd_export_plots(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

}  // namespace mfgc
