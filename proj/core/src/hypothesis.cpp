#include "impvar/hypothesis.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "impvar/errors.hpp"
#include "impvar/expr.hpp"
#include "impvar/problem_file.hpp"

namespace impvar {

namespace {

constexpr double kAntiderivTol = 1e-13;

}  // namespace

AuditReport audit(const ProblemSpec& spec, int n_samples, std::uint64_t seed) {
    if (n_samples < 2000) throw std::invalid_argument("audit: n_samples must be >= 2000");
    spec.validate_structure();
    const double d = spec.delta;
    const auto& gc = spec.growth;
    const std::size_t n_int = spec.N() + 1;
    const WeightProfile w = build_weight_profile(spec);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> us;
    for (int k = 0; k <= 12; ++k) {
        us.push_back(d * std::pow(10.0, -k));
        us.push_back(-d * std::pow(10.0, -k));
    }
    while (static_cast<int>(us.size()) < n_samples) us.push_back(-d + 2.0 * d * unit(rng));

    MarginTracker f0("F0", "f, g, I finite on the sampled domain"), f1("F1", "f odd in u"),
        f2a("F2", "F >= 0 and u f - 2F < 0 for 0 < |u| <= delta"), f4("F4", "|f| <= a1 |u|^(theta1 - 1)"),
        f5("F5", "F >= a_* |u|^theta1 and a_* < a1/theta1"), i1("I1", "I odd"),
        i2("I2", "|I| <= a2 (|u|^(theta2 - 1) + 1)"), i3("I3", "I >= 0 on [0, delta]; 2 sum I^ >= sum e^H I u"),
        gt("G", "|g| bounded by a continuous envelope b(|u|)");

    auto guarded = [&](MarginTracker& m, double t, double u, auto&& fn) {
        try {
            fn();
        } catch (const EvalError& e) {
            m.fail_at(t, u, e.what());
            f0.fail_at(t, u, e.what());
        } catch (const QuadratureError& e) {
            m.fail_at(t, u, e.what());
        }
    };

    for (std::size_t k = 0; k < us.size(); ++k) {
        const double u = us[k];
        const double a = std::abs(u);
        const std::size_t i = k % n_int;
        const auto [lo, hi] = spec.partition.active_interval(i);
        const double t = hi - (hi - lo) * unit(rng);
        const Expr& f = spec.f[i];
        guarded(f0, t, u, [&] {
            const double vf = f(t, u), vg = spec.g[i](t, u);
            if (!std::isfinite(vf) || !std::isfinite(vg)) f0.fail_at(t, u, "non-finite value");
            else f0.near(0.0, 0.0, 0.0, 0.0, t, u);
        });
        guarded(f1, t, u, [&] {
            const double fu = f(t, u);
            f1.near(f(t, -u), -fu, 1e-12, std::abs(fu), t, u);
        });
        guarded(f2a, t, u, [&] {
            if (u == 0.0) return;
            const double F = antiderivative_in_u(f, t, u, kAntiderivTol * std::pow(a, gc.theta1));
            f2a.le(0.0, F, t, u);
            f2a.le(u * f(t, u), 2.0 * F, t, u, true);
        });
        guarded(f4, t, u, [&] { f4.le(std::abs(f(t, u)), gc.a1 * std::pow(a, gc.theta1 - 1.0), t, u); });
        guarded(f5, t, u, [&] {
            if (u == 0.0) return;
            const double F = antiderivative_in_u(f, t, u, kAntiderivTol * std::pow(a, gc.theta1));
            f5.le(gc.a_star * std::pow(a, gc.theta1), F, t, u);
        });
        if (spec.N() > 0) {
            double lhs = 0.0, rhs = 0.0;
            for (std::size_t q = 0; q < spec.N(); ++q) {
                const Expr& I = spec.impulses[q];
                const double tq = spec.partition.impulse_points()[q];
                guarded(i1, tq, u, [&] {
                    const double iu = I(0.0, u);
                    i1.near(I(0.0, -u), -iu, 1e-12, std::abs(iu), tq, u);
                });
                guarded(i2, tq, u, [&] {
                    i2.le(std::abs(I(0.0, u)), gc.a2 * (std::pow(a, gc.theta2 - 1.0) + 1.0), tq, u);
                });
                guarded(i3, tq, u, [&] {
                    if (u > 0) i3.le(0.0, I(0.0, u), tq, u);
                    const double wq = w.exp_H(tq);
                    lhs += wq * I(0.0, u) * u;
                    rhs += 2.0 * wq * antiderivative_in_u(I, 0.0, u, kAntiderivTol * std::max(a, 1e-300));
                });
            }
            guarded(i3, 0.0, u, [&] { i3.le(lhs, rhs, 0.0, u); });
        }
    }

    // G: the envelope b(r) = max_t |g(t, +-r)| on a grid must be finite.
    {
        constexpr int kR = 512, kT = 32;
        for (int kr = 0; kr <= kR; ++kr) {
            const double r = d * kr / kR;
            for (std::size_t i = 0; i < n_int; ++i) {
                const auto [lo, hi] = spec.partition.active_interval(i);
                for (int kt = 1; kt <= kT; ++kt) {
                    const double t = lo + (hi - lo) * kt / kT;
                    guarded(gt, t, r, [&] {
                        const double b = std::max(std::abs(spec.g[i](t, r)), std::abs(spec.g[i](t, -r)));
                        if (!std::isfinite(b)) gt.fail_at(t, r, "g is not finite");
                        else gt.near(0.0, 0.0, 0.0, 0.0, t, r);
                    });
                }
            }
        }
    }

    // F3 trend along u = delta 2^-j.
    MarginTracker f3("F3", "inf_t F/u^2 increases without bound as u -> 0");
    {
        constexpr int kTs = 16;
        double prev = -1.0, last = 0.0;
        for (int j = 2; j <= 48; ++j) {
            const double r = d * std::ldexp(1.0, -j);
            double inf = std::numeric_limits<double>::infinity();
            double t_at = 0.0;
            for (std::size_t i = 0; i < n_int; ++i) {
                const auto [lo, hi] = spec.partition.active_interval(i);
                for (int k = 1; k <= kTs; ++k) {
                    const double t = lo + (hi - lo) * k / kTs;
                    for (double u : {r, -r}) {
                        guarded(f3, t, u, [&] {
                            const double F = antiderivative_in_u(spec.f[i], t, u, kAntiderivTol * std::pow(r, 2.0));
                            const double v = F / (u * u);
                            if (v < inf) inf = v, t_at = t;
                        });
                    }
                }
            }
            if (prev >= 0.0) f3.le(prev, inf, t_at, r, true);
            prev = inf;
            last = inf;
        }
        f3.le(1e3, last, 0.0, d * std::ldexp(1.0, -48), true);
    }

    // F5 also requires a_* < a1 / theta1.
    f5.le(gc.a_star, gc.a1 / gc.theta1, 0.0, 0.0, true);

    MarginTracker h("H", "beta < 2 e^{H0} / T^2");
    const double T = spec.partition.T();
    h.le(spec.beta, 2.0 * std::exp(w.H0()) / (T * T), 0.0, 0.0, true);

    AuditReport rep;
    rep.entries.push_back(f0.finish());
    rep.entries.back().note = "finiteness only; continuity is not tested";
    rep.entries.push_back(f1.finish());
    rep.entries.push_back(f2a.finish());
    rep.entries.push_back(f3.finish(true, true));
    rep.entries.back().note = "checked along u = delta 2^-j, j = 2..48: strictly increasing and > 1e3 at j = 48";
    rep.entries.push_back(f4.finish());
    rep.entries.push_back(f5.finish());
    rep.entries.push_back(i1.finish());
    rep.entries.push_back(i2.finish());
    rep.entries.push_back(i3.finish());
    rep.entries.push_back(gt.finish());
    rep.entries.push_back(h.finish());
    rep.entries.back().note = "H0 = " + std::to_string(w.H0());
    return rep;
}

AuditReport verify_example_closed_forms(int n_samples, std::uint64_t seed) {
    const ProblemSpec spec = example4_spec();
    const double d = spec.delta;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MarginTracker F0("F0-closed", "F_0 = (2/3)|u|^(3/2)"), F1("F1-lower", "F_1 >= 0.6 |u|^(3/2)"),
        I1("I1-hat", "int_0^u I_1 = (2/3)|u|^(3/2)"), I2("I2-hat", "int_0^u I_2 = (3/4)|u|^(4/3)"),
        I3("I3-display", "weighted impulse inequality and its lower bound");
    for (int k = 0; k < n_samples; ++k) {
        const double u = -d + 2.0 * d * unit(rng);
        const double a = std::abs(u);
        const double t0 = 0.2 * (1.0 - unit(rng));
        const double t1 = 0.6 - 0.2 * unit(rng);
        const double tol = 1e-14;
        const double p15 = std::pow(a, 1.5), p43 = std::pow(a, 4.0 / 3.0);
        F0.near(antiderivative_in_u(spec.f[0], t0, u, tol), 2.0 / 3.0 * p15, 1e-10, p15, t0, u);
        F1.le(0.6 * p15, antiderivative_in_u(spec.f[1], t1, u, tol), t1, u);
        const double i1 = antiderivative_in_u(spec.impulses[0], 0.0, u, tol);
        const double i2 = antiderivative_in_u(spec.impulses[1], 0.0, u, tol);
        I1.near(i1, 2.0 / 3.0 * p15, 1e-10, p15, 0.2, u);
        I2.near(i2, 0.75 * p43, 1e-10, p43, 0.6, u);
        // 2 sum e^{t_i} int I_i = (4/3) e^.2 |u|^1.5 + (3/2) e^.6 |u|^(4/3)
        //   >= e^.2 |u|^1.5 + e^.6 |u|^(4/3) = sum e^{t_i} I_i(u) u
        const double lhs = 2.0 * (std::exp(0.2) * i1 + std::exp(0.6) * i2);
        const double closed = 4.0 / 3.0 * std::exp(0.2) * p15 + 1.5 * std::exp(0.6) * p43;
        const double rhs = std::exp(0.2) * spec.impulses[0](0.0, u) * u + std::exp(0.6) * spec.impulses[1](0.0, u) * u;
        I3.near(lhs, closed, 1e-10, closed, 0.0, u);
        I3.le(rhs, lhs, 0.0, u);
    }
    AuditReport rep;
    for (auto* m : {&F0, &F1, &I1, &I2, &I3}) rep.entries.push_back(m->finish());
    return rep;
}

}  // namespace impvar
