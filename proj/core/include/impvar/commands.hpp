#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace impvar {

/// Exit codes of the command layer.
enum ExitCode : int { kExitOk = 0, kExitShortfall = 1, kExitInputError = 2 };

struct RunConfig {
    std::string problem_path;  // empty with example4 = true
    bool example4 = false;
    std::string out;           // output directory (file for example4)
    bool force = false;
    std::optional<double> epsilon;
    int k = 3;
    int elements_per_segment = 8;
    std::uint64_t seed = 1;
    int jobs = 1;
    int samples = 4000;
    int directions = 12;
    int random_directions = 0;
    int trials = 1000;
    int direction = 1;
    int grid = 64;
    double grad_tol = 1e-9;
    double distinct_tol = 1e-6;
    std::string method = "newton";
};

int run_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_fiber(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_norms(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_example4(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace impvar
