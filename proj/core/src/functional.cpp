#include "impvar/functional.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace impvar {

Functional::Functional(std::shared_ptr<const ProblemSpec> spec, SpacePtr space, const WeightProfile& weights,
                       double quad_rel_tol)
    : spec_(std::move(spec)), space_(std::move(space)),
      mn_(std::make_shared<ModifiedNonlinearity>(*spec_, weights, quad_rel_tol)), epsilon_(spec_->epsilon),
      H0_(weights.H0()), M1_(weights.M1()), e_star_(weights.e_star(spec_->growth)) {
    for (std::size_t i = 0; i <= spec_->N(); ++i) any_g_ |= !spec_->g[i].is_zero();
    if (any_g_) {
        const double d = spec_->delta;
        constexpr int kT = 64, kU = 256;
        for (std::size_t i = 0; i <= spec_->N(); ++i) {
            if (spec_->g[i].is_zero()) continue;
            const auto [a, b] = spec_->partition.active_interval(i);
            double m = 0.0;
            for (int kt = 1; kt <= kT; ++kt) {
                const double t = a + (b - a) * kt / kT;
                for (int ku = 0; ku <= kU; ++ku) {
                    const double u = -d + 2.0 * d * ku / kU;
                    m = std::max(m, std::abs(mn_->G_tilde(i, t, u)));
                }
            }
            C0_ += m * spec_->partition.T();
            G_max_ = std::max(G_max_, m);
        }
    }
}

Functional Functional::make(const ProblemSpec& spec, int elements_per_segment, int weight_samples) {
    spec.validate_structure();
    const WeightProfile w = build_weight_profile(spec, weight_samples);
    auto space = DiscreteSpace::build(spec.partition, elements_per_segment, w);
    return Functional(std::make_shared<ProblemSpec>(spec), std::move(space), w);
}

Functional Functional::with_epsilon(double eps) const {
    Functional f = *this;
    f.epsilon_ = eps;
    return f;
}

std::pair<double, double> Functional::quadratic_terms(const Eigen::VectorXd& c) const {
    const DiscreteSpace& s = *space_;
    // Sums of squares at the quadrature points rather than c'Kc, which
    // cancels badly for rough fields and spoils difference quotients.
    double curv = 0.0, slope = 0.0;
    for (const auto& el : s.elements()) {
        const auto l = s.local(c, el);
        for (int q = 0; q < s.quad_points(); ++q) {
            const double* d1 = &el.dphi[4 * q];
            const double* d2 = &el.ddphi[4 * q];
            const double du = l[0] * d1[0] + l[1] * d1[1] + l[2] * d1[2] + l[3] * d1[3];
            const double ddu = l[0] * d2[0] + l[1] * d2[1] + l[2] * d2[2] + l[3] * d2[3];
            curv += el.w[q] * el.eH[q] * ddu * ddu;
            slope += el.w[q] * du * du;
        }
    }
    return {0.5 * curv, 0.5 * spec_->beta * slope};
}

EnergyBreakdown Functional::energy(const Eigen::VectorXd& c) const {
    const DiscreteSpace& s = *space_;
    EnergyBreakdown e;
    std::tie(e.quadratic, e.beta_term) = quadratic_terms(c);
    const bool with_g = epsilon_ != 0.0 && any_g_;
    double gsum = 0.0;
    for (const auto& el : s.elements()) {
        if (el.interval < 0) continue;
        const auto i = static_cast<std::size_t>(el.interval);
        const auto l = s.local(c, el);
        for (int q = 0; q < s.quad_points(); ++q) {
            const double* p = &el.phi[4 * q];
            const double u = l[0] * p[0] + l[1] * p[1] + l[2] * p[2] + l[3] * p[3];
            const double wq = el.w[q] * el.eH[q];
            e.f_term += wq * mn_->F_tilde(i, el.t[q], u);
            if (with_g) gsum += wq * mn_->G_tilde(i, el.t[q], u);
        }
    }
    for (std::size_t k = 0; k < s.impulse_count(); ++k) e.impulse_term += mn_->I_hat(k, c[s.impulse_dof(k)]);
    e.g_term = epsilon_ * gsum;
    e.total = e.quadratic - e.beta_term - e.f_term - e.impulse_term - e.g_term;
    return e;
}

Eigen::VectorXd Functional::gradient(const Eigen::VectorXd& c) const {
    const DiscreteSpace& s = *space_;
    Eigen::VectorXd g = s.gram() * c - spec_->beta * (s.slope_gram() * c);
    const bool with_g = epsilon_ != 0.0 && any_g_;
    for (const auto& el : s.elements()) {
        if (el.interval < 0) continue;
        const auto i = static_cast<std::size_t>(el.interval);
        const auto l = s.local(c, el);
        for (int q = 0; q < s.quad_points(); ++q) {
            const double* p = &el.phi[4 * q];
            const double u = l[0] * p[0] + l[1] * p[1] + l[2] * p[2] + l[3] * p[3];
            double r = mn_->f_tilde(i, el.t[q], u);
            if (with_g) r += epsilon_ * mn_->g_tilde(i, el.t[q], u);
            r *= el.w[q] * el.eH[q];
            for (int k = 0; k < 4; ++k)
                if (el.dof[k] >= 0) g[el.dof[k]] -= r * p[k];
        }
    }
    for (std::size_t k = 0; k < s.impulse_count(); ++k) {
        const int d = s.impulse_dof(k);
        g[d] -= s.impulse_weight(k) * mn_->I_tilde(k, c[d]);
    }
    return g;
}

Eigen::VectorXd Functional::hessian_vec(const Eigen::VectorXd& c, const Eigen::VectorXd& v, double tau) const {
    if (!(tau >= 1e-8 && tau <= 1e-4)) throw std::invalid_argument("hessian_vec: tau must lie in [1e-8, 1e-4]");
    const double nv = std::sqrt(v.dot(space_->gram() * v));
    if (nv == 0.0) return Eigen::VectorXd::Zero(c.size());
    double nc = std::sqrt(c.dot(space_->gram() * c));
    if (nc == 0.0) nc = 1.0;
    const double h = tau * nc / nv;
    return (gradient(c + h * v) - gradient(c - h * v)) / (2.0 * h);
}

Eigen::MatrixXd Functional::hessian(const Eigen::VectorXd& c, double tau) const {
    const int n = static_cast<int>(c.size());
    Eigen::MatrixXd H(n, n);
    for (int k = 0; k < n; ++k) H.col(k) = hessian_vec(c, Eigen::VectorXd::Unit(n, k), tau);
    return 0.5 * (H + H.transpose());
}

ScalingTerms Functional::scaling_terms(const Eigen::VectorXd& w) const {
    const DiscreteSpace& s = *space_;
    ScalingTerms st;
    for (const auto& el : s.elements()) {
        if (el.interval < 0) continue;
        const auto i = static_cast<std::size_t>(el.interval);
        const auto l = s.local(w, el);
        for (int q = 0; q < s.quad_points(); ++q) {
            const double* p = &el.phi[4 * q];
            const double u = l[0] * p[0] + l[1] * p[1] + l[2] * p[2] + l[3] * p[3];
            st.f_virial += el.w[q] * el.eH[q] * (u * mn_->f_tilde(i, el.t[q], u) - 2.0 * mn_->F_tilde(i, el.t[q], u));
        }
    }
    for (std::size_t k = 0; k < s.impulse_count(); ++k) {
        const double u = w[s.impulse_dof(k)];
        st.impulse_virial += 2.0 * mn_->I_hat(k, u) - s.impulse_weight(k) * u * mn_->I_tilde(k, u);
    }
    return st;
}

double Functional::C0() const { return C0_; }

PerturbationGap Functional::perturbation_gap(const Eigen::VectorXd& c) const {
    PerturbationGap pg;
    pg.C0 = C0_;
    pg.bound = std::abs(epsilon_) * C0_;
    if (epsilon_ != 0.0 && any_g_) pg.gap = std::abs(energy(c).total - with_epsilon(0.0).energy(c).total);
    pg.holds = pg.gap <= pg.bound;
    return pg;
}

double Functional::f_growth_bound(double r) const {
    return M1_ * mn_->A1() * spec_->partition.T() * e_star_ * std::pow(r, spec_->growth.theta1);
}

double Functional::impulse_growth_bound(double r) const {
    const auto& g = spec_->growth;
    return static_cast<double>(spec_->N()) * M1_ * g.a2 * (g.theta2 + 1.0) / g.theta2 * e_star_ *
           (std::pow(r, g.theta2) + 1.0);
}

double Functional::coercivity_floor(double r) const {
    const double T = spec_->partition.T();
    const double beta = spec_->beta;
    const double lead = beta > 0 ? 0.5 - beta * T * T / (4.0 * std::exp(H0_)) : 0.5;
    const double n_int = static_cast<double>(spec_->N() + 1);
    return lead * r * r - f_growth_bound(r) - impulse_growth_bound(r) - G_max_ * T * n_int;
}

}  // namespace impvar
