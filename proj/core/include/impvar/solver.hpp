#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "impvar/fem_space.hpp"
#include "impvar/functional.hpp"

namespace impvar {

enum class DescentMethod { Newton, LBFGS };

struct SolverOptions {
    DescentMethod method = DescentMethod::Newton;
    double grad_tol = 1e-9;       // ||grad||_* <= grad_tol (1 + |J|)
    double distinct_tol = 1e-6;   // ||u - v||_E > distinct_tol max(||u||_E, ||v||_E, 1)
    double deflation_power = 2.0;
    double deflation_shift = 1.0;
    int newton_max_iterations = 200;
    int lbfgs_max_iterations = 5000;
    int lbfgs_memory = 10;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_halvings = 60;
    double step_cap = 0.5;        // Newton steps limited to step_cap ||u||_E
    double hessian_tau = 1e-6;
    int n_directions = 12;        // seeds sin(pi t/T) sin(j pi t/T), j = 1..n
    int random_directions = 0;    // extra random seed directions
    std::uint64_t rng_seed = 1;
    int jobs = 1;
};

/// Finds the nontrivial roots of M(u) grad J(u) where
/// M(u) = prod_f ((||u - f||_E / L)^-p + shift), L the start norm.
class Deflation {
public:
    Deflation(const DiscreteSpace& space, std::vector<Eigen::VectorXd> found, double length, double power,
              double shift);
    double factor(const Eigen::VectorXd& c) const;
    /// M and its gradient.
    std::pair<double, Eigen::VectorXd> factor_and_gradient(const Eigen::VectorXd& c) const;
    bool empty() const noexcept { return found_.empty(); }

private:
    const DiscreteSpace* space_;
    std::vector<Eigen::VectorXd> found_;
    double L_, p_, shift_;
};

struct DescentResult {
    Eigen::VectorXd c;
    bool converged = false;
    int iterations = 0;
    double energy = 0.0;
    double grad_norm = 0.0;
    std::string message;
    std::vector<double> energy_history;
    std::vector<double> grad_history;
};

DescentResult descend(const Functional& J, const Eigen::VectorXd& start, const std::vector<Eigen::VectorXd>& deflate,
                      const SolverOptions& opt);

struct Seed {
    Eigen::VectorXd start;
    int index = 0;   // direction number j (1-based), or n + r for random ones
    int sign = 1;
    double c_u = 0.0;
    std::string label;
};

/// Starts 0.5 c(d) d for the seed directions d. Directions whose fibering
/// root cannot be found are skipped and reported in `log`.
std::vector<Seed> seed_starts(const Functional& J, const SolverOptions& opt, bool both_signs,
                              std::vector<std::string>* log = nullptr);

struct CriticalPoint {
    Field field;
    EnergyBreakdown energy;
    double grad_norm = 0.0;
    double norm_E = 0.0;
    double norm_inf = 0.0;
    bool accepted = false;   // ||u||_inf < delta / 2
    bool trivial = false;    // indistinguishable from 0
    bool small_norm = false; // ||u||_E <= e^{H0/2} delta / 2, so ||u||_inf <= delta/2 a priori
    int iterations = 0;
    std::string origin;
};

/// Recomputes the norms of each point and marks it accepted / trivial / small_norm.
void small_solution_filter(std::vector<CriticalPoint>& points, const Functional& J, double distinct_tol = 1e-6);

bool distinct(const DiscreteSpace& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol);

struct SearchResult {
    std::vector<CriticalPoint> points;  // sorted by total energy
    int requested = 0;
    int found = 0;  // accepted nontrivial points
    bool shortfall = false;
    std::vector<std::string> log;
    int seeds_tried = 0;

    /// Every accepted nontrivial point has its negative in the list.
    bool pairs_complete(const DiscreteSpace& s, double tol = 1e-6) const;
};

/// Runs seeds with deflation until k accepted nontrivial critical points are
/// found or the seeds run out. At epsilon = 0 each new point's negative is
/// checked and added as well.
SearchResult multiplicity_search(const Functional& J, int k, const SolverOptions& opt);

}  // namespace impvar
