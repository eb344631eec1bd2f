#pragma once

#include <memory>
#include <utility>

#include <Eigen/Dense>

#include "impvar/cutoff.hpp"
#include "impvar/fem_space.hpp"
#include "impvar/problem.hpp"

namespace impvar {

/// Terms of J(u) = quadratic - beta_term - f_term - impulse_term - g_term.
struct EnergyBreakdown {
    double quadratic = 0.0;     // 1/2 ||u||_E^2
    double beta_term = 0.0;     // beta/2 \int |u'|^2
    double f_term = 0.0;        // sum_i \int e^H F~_i(t, u)
    double impulse_term = 0.0;  // sum_k I^_k(u(t_k))
    double g_term = 0.0;        // epsilon sum_i \int e^H G~_i(t, u)
    double total = 0.0;
};

struct PerturbationGap {
    double gap = 0.0;    // |J_eps(u) - J_0(u)|
    double C0 = 0.0;
    double bound = 0.0;  // |eps| C0
    bool holds = true;
};

/// Virial sums used by the fibering derivatives at w.
struct ScalingTerms {
    double f_virial = 0.0;        // sum_i \int e^H (w f~(w) - 2 F~(w))
    double impulse_virial = 0.0;  // sum_k (2 I^_k(w_k) - e^{H(t_k)} w_k I~_k(w_k))
};

/// Discrete cut-off energy functional on a Hermite space.
class Functional {
public:
    Functional(std::shared_ptr<const ProblemSpec> spec, SpacePtr space, const WeightProfile& weights,
               double quad_rel_tol = 1e-13);

    /// Loads weights and mesh for `spec` in one step.
    static Functional make(const ProblemSpec& spec, int elements_per_segment, int weight_samples = 1024);

    Functional with_epsilon(double eps) const;

    const ProblemSpec& spec() const noexcept { return *spec_; }
    const SpacePtr& space() const noexcept { return space_; }
    const ModifiedNonlinearity& nonlinearity() const noexcept { return *mn_; }
    double epsilon() const noexcept { return epsilon_; }
    double H0() const noexcept { return H0_; }
    double M1() const noexcept { return M1_; }
    double e_star() const noexcept { return e_star_; }

    EnergyBreakdown energy(const Eigen::VectorXd& c) const;
    /// (1/2 ||u||_E^2, beta/2 \int u'^2) summed pointwise over the quadrature.
    std::pair<double, double> quadratic_terms(const Eigen::VectorXd& c) const;
    EnergyBreakdown energy(const Field& u) const { return energy(u.c); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& c) const;

    /// Central difference of the gradient along v with step tau ||c||_E / ||v||_E
    /// (||c||_E taken as 1 when c = 0). tau must lie in [1e-8, 1e-4].
    Eigen::VectorXd hessian_vec(const Eigen::VectorXd& c, const Eigen::VectorXd& v, double tau = 1e-6) const;
    /// Dense symmetrised finite-difference Hessian.
    Eigen::MatrixXd hessian(const Eigen::VectorXd& c, double tau = 1e-6) const;

    double dual_norm(const Eigen::VectorXd& g) const { return impvar::dual_norm(*space_, g); }

    ScalingTerms scaling_terms(const Eigen::VectorXd& w) const;

    /// sum_{i=0..N} max |G~_i| T over the interval and |u| <= delta (sampled).
    double C0() const;
    PerturbationGap perturbation_gap(const Eigen::VectorXd& c) const;

    /// M1 A1 T e_* r^theta1.
    double f_growth_bound(double norm_E) const;
    /// N M1 a2 (theta2 + 1)/theta2 e_* (r^theta2 + 1).
    double impulse_growth_bound(double norm_E) const;
    /// Lower bound for J in terms of r = ||u||_E (assumes |epsilon| <= 1).
    double coercivity_floor(double norm_E) const;

private:
    std::shared_ptr<const ProblemSpec> spec_;
    SpacePtr space_;
    std::shared_ptr<const ModifiedNonlinearity> mn_;
    double epsilon_ = 0.0;
    double H0_ = 0.0, M1_ = 1.0, e_star_ = 1.0;
    bool any_g_ = false;
    double C0_ = 0.0;
    double G_max_ = 0.0;  // max_i max |G~_i|
};

}  // namespace impvar
