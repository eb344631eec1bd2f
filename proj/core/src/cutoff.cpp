#include "impvar/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "impvar/errors.hpp"
#include "impvar/quadrature.hpp"

namespace impvar {

CutoffProfile::CutoffProfile(double delta) : delta_(delta) {
    if (!(std::isfinite(delta) && delta > 0)) throw SpecError("cutoff: delta must be positive");
}

double CutoffProfile::m(double s) const {
    const double a = std::abs(s);
    if (a <= 0.5 * delta_) return 1.0;
    if (a >= delta_) return 0.0;
    const double x = 2.0 * a / delta_ - 1.0;
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

double CutoffProfile::m_prime(double s) const {
    const double a = std::abs(s);
    if (a <= 0.5 * delta_ || a >= delta_) return 0.0;
    const double x = 2.0 * a / delta_ - 1.0;
    const double dq = -6.0 * x * (1.0 - x);
    return (s > 0 ? 1.0 : -1.0) * dq * 2.0 / delta_;
}

ModifiedNonlinearity::ModifiedNonlinearity(const ProblemSpec& spec, const WeightProfile& weights,
                                           double quad_rel_tol)
    : cutoff_(spec.delta), growth_(spec.growth), f_(spec.f), g_(spec.g), I_(spec.impulses),
      rel_tol_(quad_rel_tol) {
    for (double tk : spec.partition.impulse_points()) impulse_weight_.push_back(weights.exp_H(tk));
}

double ModifiedNonlinearity::integrate_u(const Expr& e, double t, double u) const {
    if (u == 0.0 || e.is_zero()) return 0.0;
    AdaptiveOptions opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = rel_tol_;
    return integrate([&](double s) { return e(t, s); }, 0.0, u, opt).value;
}

double ModifiedNonlinearity::F(std::size_t i, double t, double u) const { return integrate_u(f_[i], t, u); }
double ModifiedNonlinearity::G(std::size_t i, double t, double u) const { return integrate_u(g_[i], t, u); }

double ModifiedNonlinearity::F_tilde(std::size_t i, double t, double u) const {
    const double a = std::abs(u);
    const double d = cutoff_.delta();
    const double tail = growth_.a_star * std::pow(a, growth_.theta1);
    if (a >= d) return tail;
    if (a <= 0.5 * d) return F(i, t, u);
    const double m = cutoff_.m(u);
    return m * F(i, t, u) + (1.0 - m) * tail;
}

double ModifiedNonlinearity::f_tilde(std::size_t i, double t, double u) const {
    const double a = std::abs(u);
    const double d = cutoff_.delta();
    if (a <= 0.5 * d) return f_[i](t, u);
    const double th = growth_.theta1;
    const double tail_prime = growth_.a_star * th * std::pow(a, th - 2.0) * u;
    if (a >= d) return tail_prime;
    const double m = cutoff_.m(u);
    const double tail = growth_.a_star * std::pow(a, th);
    return cutoff_.m_prime(u) * (F(i, t, u) - tail) + m * f_[i](t, u) + (1.0 - m) * tail_prime;
}

double ModifiedNonlinearity::G_tilde(std::size_t i, double t, double u) const {
    const double a = std::abs(u);
    if (a >= cutoff_.delta() || g_[i].is_zero()) return 0.0;
    return cutoff_.m(u) * G(i, t, u);
}

double ModifiedNonlinearity::g_tilde(std::size_t i, double t, double u) const {
    const double a = std::abs(u);
    const double d = cutoff_.delta();
    if (a >= d || g_[i].is_zero()) return 0.0;
    if (a <= 0.5 * d) return g_[i](t, u);
    return cutoff_.m_prime(u) * G(i, t, u) + cutoff_.m(u) * g_[i](t, u);
}

double ModifiedNonlinearity::I_tilde(std::size_t k, double u) const {
    if (std::abs(u) >= cutoff_.delta()) return 0.0;
    return cutoff_.m(u) * I_[k](0.0, u);
}

double ModifiedNonlinearity::I_hat(std::size_t k, double u) const {
    if (u == 0.0) return 0.0;
    const double d = cutoff_.delta();
    const double sgn = u > 0 ? 1.0 : -1.0;
    const double a = std::min(std::abs(u), d);
    AdaptiveOptions opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = rel_tol_;
    const Expr& e = I_[k];
    double acc = integrate([&](double s) { return e(0.0, s); }, 0.0, sgn * std::min(a, 0.5 * d), opt).value;
    if (a > 0.5 * d)
        acc += integrate([&](double s) { return cutoff_.m(s) * e(0.0, s); }, sgn * 0.5 * d, sgn * a, opt).value;
    return impulse_weight_[k] * acc;
}

AuditReport audit_derived_conditions(const ModifiedNonlinearity& mn, const ProblemSpec& spec, int n_samples,
                                     std::uint64_t seed) {
    const double d = spec.delta;
    const auto& gc = spec.growth;
    const std::size_t n_int = spec.N() + 1;
    const double A1 = mn.A1();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Sample {
        std::size_t i;
        double t, u;
    };
    auto random_t = [&](std::size_t i) {
        const auto [a, b] = spec.partition.active_interval(i);
        return b - (b - a) * unit(rng);  // in (a, b]
    };
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < n_int; ++i)
        for (double s : {0.5 * d, d})
            for (double sg : {-1.0, 1.0}) samples.push_back({i, random_t(i), sg * s});
    while (static_cast<int>(samples.size()) < n_samples) {
        const std::size_t i = samples.size() % n_int;
        const double t = random_t(i);
        samples.push_back({i, t, -3.0 * d + 6.0 * d * unit(rng)});
    }

    // Envelope b(r) of |g_i| on a t-grid; the sample's own t is added per check.
    constexpr int kTGrid = 32;
    bool any_g = false;
    for (std::size_t i = 0; i < n_int; ++i) any_g |= !mn.g_is_zero(i);
    auto b_env = [&](double r, double t_extra, std::size_t i_extra) {
        double b = 0.0;
        for (std::size_t i = 0; i < n_int; ++i) {
            if (mn.g_is_zero(i)) continue;
            const auto [a, bb] = spec.partition.active_interval(i);
            for (int k = 1; k <= kTGrid; ++k) {
                const double t = a + (bb - a) * k / kTGrid;
                b = std::max({b, std::abs(mn.g(i, t, r)), std::abs(mn.g(i, t, -r))});
            }
        }
        if (i_extra < n_int && !mn.g_is_zero(i_extra))
            b = std::max({b, std::abs(mn.g(i_extra, t_extra, r)), std::abs(mn.g(i_extra, t_extra, -r))});
        return b;
    };
    double b_max = 0.0;
    if (any_g)
        for (int k = 0; k <= 512; ++k) b_max = std::max(b_max, b_env(d * k / 512.0, 0.0, n_int));
    const double K = mn.cutoff().max_abs_m_prime();

    MarginTracker f1("F1'", "f~ odd in u"), f2i("F2'(i)", "u f~ - 2 F~ < 0 for u != 0"),
        f2ii("F2'(ii)", "g~ = G~ = 0 for |u| >= delta"), f2iii("F2'(iii)", "F~ >= 0"),
        f4("F4'", "|f~| <= A1 |u|^(theta1 - 1)"), fb("F4'-int", "|F~| <= (A1/theta1) |u|^theta1"),
        gp("G'", "|g~| <= K delta max b + b(|u|)"), i1("I1'", "I~ odd"),
        i2("I2'", "|I~| <= a2 (|u|^(theta2 - 1) + 1)"), i3i("I3'(i)", "I^ >= 0"),
        i3ii("I3'(ii)", "2 sum I^ >= sum e^H I~ u");

    for (const auto& s : samples) {
        const double u = s.u, t = s.t, a = std::abs(u);
        const double ft = mn.f_tilde(s.i, t, u);
        const double Ft = mn.F_tilde(s.i, t, u);
        f1.near(mn.f_tilde(s.i, t, -u), -ft, 1e-12, std::abs(ft), t, u);
        if (u != 0.0) f2i.le(u * ft, 2.0 * Ft, t, u, true);
        if (a >= d) f2ii.le(std::abs(mn.g_tilde(s.i, t, u)) + std::abs(mn.G_tilde(s.i, t, u)), 0.0, t, u);
        f2iii.le(0.0, Ft, t, u);
        f4.le(std::abs(ft), A1 * std::pow(a, gc.theta1 - 1.0), t, u);
        fb.le(std::abs(Ft), A1 / gc.theta1 * std::pow(a, gc.theta1), t, u);
        if (any_g) {
            const double gt = std::abs(mn.g_tilde(s.i, t, u));
            const double B = K * d * b_max + (a < d ? b_env(a, t, s.i) : b_env(d, t, s.i));
            gp.le(gt, B, t, u);
        } else {
            gp.le(std::abs(mn.g_tilde(s.i, t, u)), 0.0, t, u);
        }

        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k < mn.impulses(); ++k) {
            const double tk = spec.partition.impulse_points()[k];
            const double it = mn.I_tilde(k, u);
            i1.near(mn.I_tilde(k, -u), -it, 1e-12, std::abs(it), tk, u);
            i2.le(std::abs(it), gc.a2 * (std::pow(a, gc.theta2 - 1.0) + 1.0), tk, u);
            const double ih = mn.I_hat(k, u);
            i3i.le(0.0, ih, tk, u);
            lhs += mn.impulse_weight(k) * it * u;
            rhs += 2.0 * ih;
        }
        if (mn.impulses() > 0) i3ii.le(lhs, rhs, 0.0, u);
    }

    // Trend of inf_t F~/u^2 along u = delta 2^{-j}.
    MarginTracker f3("F3'", "inf_t F~/u^2 increases without bound as u -> 0");
    {
        constexpr int kTs = 16;
        double prev = -1.0, last = 0.0;
        for (int j = 2; j <= 48; ++j) {
            const double r = d * std::ldexp(1.0, -j);
            double inf = std::numeric_limits<double>::infinity();
            double t_at = 0.0;
            for (std::size_t i = 0; i < n_int; ++i) {
                const auto [a, b] = spec.partition.active_interval(i);
                for (int k = 1; k <= kTs; ++k) {
                    const double t = a + (b - a) * k / kTs;
                    for (double u : {r, -r}) {
                        const double v = mn.F_tilde(i, t, u) / (u * u);
                        if (v < inf) inf = v, t_at = t;
                    }
                }
            }
            if (prev >= 0.0) f3.le(prev, inf, t_at, r, true);
            prev = inf;
            last = inf;
        }
        f3.le(1e3, last, 0.0, d * std::ldexp(1.0, -48), true);
    }

    AuditReport rep;
    auto entry = [&](const MarginTracker& m, bool indicative = false) {
        rep.entries.push_back(m.finish(true, indicative));
    };
    entry(f1);
    entry(f2i);
    entry(f2ii);
    entry(f2iii);
    entry(f3, true);
    rep.entries.back().note = "checked along u = delta 2^-j, j = 2..48: strictly increasing and > 1e3 at j = 48";
    entry(f4);
    entry(fb);
    entry(i1);
    entry(i2);
    entry(i3i);
    entry(i3ii);
    entry(gp);
    if (!any_g) rep.entries.back().note = "g = 0 on every interval";
    return rep;
}

}  // namespace impvar
