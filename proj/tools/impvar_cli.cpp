#include <iostream>

#include <CLI11.hpp>

#include "impvar/commands.hpp"

namespace {

void add_problem(CLI::App* app, impvar::RunConfig& cfg) {
    app->add_option("problem", cfg.problem_path, "Problem file");
    app->add_flag("--example4", cfg.example4, "Use the bundled two-impulse example");
}

void add_mesh(CLI::App* app, impvar::RunConfig& cfg) {
    app->add_option("--elements-per-segment,-e", cfg.elements_per_segment, "Elements per partition segment")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical points of impulsive fourth-order variational problems"};
    app.require_subcommand(1);
    impvar::RunConfig cfg;

    auto* check = app.add_subcommand("check", "Audit the hypotheses of a problem");
    add_problem(check, cfg);
    check->add_option("--samples", cfg.samples, "Samples per audit (>= 2000)");
    check->add_option("--seed", cfg.seed, "RNG seed");
    check->add_option("--out,-o", cfg.out, "Write audit.json and audit.txt to this directory");
    check->add_flag("--force", cfg.force, "Replace an existing output directory");

    auto* solve = app.add_subcommand("solve", "Search for k distinct small critical points");
    add_problem(solve, cfg);
    add_mesh(solve, cfg);
    solve->add_option("--k", cfg.k, "Number of critical points requested")->check(CLI::NonNegativeNumber);
    solve->add_option("--epsilon", cfg.epsilon, "Override the perturbation size");
    solve->add_option("--directions", cfg.directions, "Number of sine seed directions");
    solve->add_option("--random-directions", cfg.random_directions, "Extra random seed directions");
    solve->add_option("--seed", cfg.seed, "RNG seed for random directions");
    solve->add_option("--jobs,-j", cfg.jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);
    solve->add_option("--grad-tol", cfg.grad_tol, "Gradient tolerance");
    solve->add_option("--distinct-tol", cfg.distinct_tol, "Relative distinctness tolerance");
    solve->add_option("--method", cfg.method, "newton or lbfgs");
    solve->add_option("--out,-o", cfg.out, "Results directory");
    solve->add_flag("--force", cfg.force, "Replace an existing results directory");

    auto* fiber = app.add_subcommand("fiber", "Scan the fibering map along a sine mode");
    add_problem(fiber, cfg);
    add_mesh(fiber, cfg);
    fiber->add_option("--direction", cfg.direction, "Mode number j >= 1");
    fiber->add_option("--grid", cfg.grid, "Grid points of the scan");
    fiber->add_option("--out,-o", cfg.out, "Output directory (CSV goes to stdout otherwise)");
    fiber->add_flag("--force", cfg.force, "Replace an existing output directory");

    auto* norms = app.add_subcommand("norms", "Check the embedding inequalities on random fields");
    add_problem(norms, cfg);
    add_mesh(norms, cfg);
    norms->add_option("--trials", cfg.trials, "Number of random fields");
    norms->add_option("--seed", cfg.seed, "RNG seed");

    auto* ex4 = app.add_subcommand("example4", "Print the bundled two-impulse problem file");
    ex4->add_option("--out,-o", cfg.out, "Write to this file instead of stdout");
    ex4->add_flag("--force", cfg.force, "Replace an existing file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : impvar::kExitInputError;
    }

    if (*check) return impvar::run_check(cfg, std::cout, std::cerr);
    if (*solve) return impvar::run_solve(cfg, std::cout, std::cerr);
    if (*fiber) return impvar::run_fiber(cfg, std::cout, std::cerr);
    if (*norms) return impvar::run_norms(cfg, std::cout, std::cerr);
    return impvar::run_example4(cfg, std::cout, std::cerr);
}
