#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "impvar/problem.hpp"
#include "impvar/report.hpp"

namespace impvar {

/// Even C^1 step m with m = 1 on |s| <= delta/2, m = 0 on |s| >= delta and
/// a cubic Hermite blend (strictly decreasing in |s|) in between.
class CutoffProfile {
public:
    explicit CutoffProfile(double delta);

    double delta() const noexcept { return delta_; }
    double m(double s) const;
    double m_prime(double s) const;
    /// max |m'| = 3 / delta, attained at |s| = 3 delta / 4.
    double max_abs_m_prime() const noexcept { return 3.0 / delta_; }

private:
    double delta_;
};

/// The cut-off nonlinearities built from a problem:
///
///     F~ = m F + (1 - m) a_* |u|^theta1,   G~ = m G,   I~ = m I
///
/// and their u-derivatives. Interval indices run 0..N, impulse indices 0..N-1.
class ModifiedNonlinearity {
public:
    ModifiedNonlinearity(const ProblemSpec& spec, const WeightProfile& weights, double quad_rel_tol = 1e-13);

    const CutoffProfile& cutoff() const noexcept { return cutoff_; }
    std::size_t intervals() const noexcept { return f_.size(); }
    std::size_t impulses() const noexcept { return I_.size(); }

    double f(std::size_t i, double t, double u) const { return f_[i](t, u); }
    double g(std::size_t i, double t, double u) const { return g_[i](t, u); }
    double I(std::size_t k, double u) const { return I_[k](0.0, u); }
    double F(std::size_t i, double t, double u) const;
    double G(std::size_t i, double t, double u) const;

    double F_tilde(std::size_t i, double t, double u) const;
    double f_tilde(std::size_t i, double t, double u) const;
    double G_tilde(std::size_t i, double t, double u) const;
    double g_tilde(std::size_t i, double t, double u) const;
    double I_tilde(std::size_t k, double u) const;
    /// e^{H(t_k)} \int_0^u I~_k.
    double I_hat(std::size_t k, double u) const;
    double impulse_weight(std::size_t k) const { return impulse_weight_[k]; }

    bool g_is_zero(std::size_t i) const { return g_[i].is_zero(); }

    /// delta * max |m'| over [delta/2, delta].
    double A0() const noexcept { return cutoff_.delta() * cutoff_.max_abs_m_prime(); }
    /// (A0 + 2) a1.
    double A1() const noexcept { return (A0() + 2.0) * growth_.a1; }
    const GrowthConstants& growth() const noexcept { return growth_; }

private:
    double integrate_u(const Expr& e, double t, double u) const;

    CutoffProfile cutoff_;
    GrowthConstants growth_;
    std::vector<Expr> f_, g_, I_;
    std::vector<double> impulse_weight_;
    double rel_tol_;
};

/// Samples the derived conditions of the cut-off problem on
/// (t, u) with u in [-3 delta, 3 delta] plus the shells |u| = delta/2, delta.
AuditReport audit_derived_conditions(const ModifiedNonlinearity& mn, const ProblemSpec& spec,
                                     int n_samples = 10000, std::uint64_t seed = 1);

}  // namespace impvar
