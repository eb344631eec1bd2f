#include <cmath>
#include <random>

#include "doctest.h"
#include "impvar/cutoff.hpp"
#include "impvar/functional.hpp"
#include "support.hpp"

using namespace impvar;

namespace {

template <class G>
double field_integral(const Field& f, double a, double b, G&& g, int per_element = 400) {
    double total = 0.0;
    const auto& n = f.space->nodes();
    for (std::size_t e = 0; e + 1 < n.size(); ++e) {
        const double lo = std::max(a, n[e]), hi = std::min(b, n[e + 1]);
        if (hi <= lo) continue;
        total += test::simpson([&](double t) { return g(std::clamp(t, lo + 1e-13, hi - 1e-13)); }, lo, hi,
                               per_element);
    }
    return total;
}

// Direct evaluation of the example's energy for fields with |u| <= delta/2,
// where every cut-off is inactive and the primitives are closed forms.
double example4_energy_oracle(const Field& f) {
    const double T = 1.0;
    const double quad = 0.5 * field_integral(f, 0.0, T, [&](double t) {
        const double d2 = f.second_derivative(t);
        return std::exp(t) * d2 * d2;
    });
    const double beta = 0.5 * field_integral(f, 0.0, T, [&](double t) {
        const double d1 = f.derivative(t);
        return d1 * d1;
    });
    auto F0 = [](double u) { return 2.0 / 3.0 * std::pow(std::abs(u), 1.5); };
    auto F1 = [](double u) {
        // \int_0^|u| s^{1/2} (1 + 0.1 sin s) ds by fine Simpson (odd f, even F).
        const double a = std::abs(u);
        if (a == 0.0) return 0.0;
        return test::simpson([](double s) { return std::sqrt(s) * (1 + 0.1 * std::sin(s)); }, 0.0, a, 20000) +
               0.0;
    };
    double fterm = field_integral(f, 0.0, 0.2, [&](double t) { return std::exp(t) * F0(f.value(t)); });
    fterm += field_integral(f, 0.4, 0.6, [&](double t) { return std::exp(t) * F1(f.value(t)); }, 60);
    fterm += field_integral(f, 0.8, 1.0, [&](double t) { return std::exp(t) * F0(f.value(t)); });
    const double u1 = f.value(0.2), u2 = f.value(0.6);
    const double imp = std::exp(0.2) * F0(u1) + std::exp(0.6) * 0.75 * std::pow(std::abs(u2), 4.0 / 3.0);
    return quad - beta - fterm - imp;
}

}  // namespace

TEST_CASE("energy of small fields matches the closed-form oracle") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
        Field f = random_field(J.space(), rng);
        f = f * (0.3 / norm_inf(f));  // below delta / 2
        const EnergyBreakdown e = J.energy(f);
        CHECK(e.quadratic == test::rel(0.5 * norm_E(f) * norm_E(f), 1e-13));
        CHECK(e.g_term == 0.0);
        CHECK(e.total == doctest::Approx(e.quadratic - e.beta_term - e.f_term - e.impulse_term - e.g_term));
        // Simpson on |u|^{3/2} near zeros of u limits the oracle to about 1e-7.
        CHECK(e.total == test::rel(example4_energy_oracle(f), 2e-6));
    }
}

TEST_CASE("quadratic problem") {
    // f = I = 0 and small fields: J = 1/2 c'Kc - beta/2 c'Dc exactly.
    const ProblemSpec s = test::example4_variant({{"f = \"abs(u)^(-1/2)*u*(1 + 0.1*sin(abs(u)))\"", "f = \"0\""},
                                                   {"I = \"abs(u)^(-1/2)*u\"", "I = \"0\""},
                                                   {"I = \"abs(u)^(-2/3)*u\"", "I = \"0\""}});
    ProblemSpec q = s;
    q.f = {Expr(), Expr(), Expr()};
    const Functional J = Functional::make(q, 3);
    std::mt19937_64 rng(2);
    Field f = random_field(J.space(), rng);
    f = f * (0.2 / norm_inf(f));
    const auto& K = J.space()->gram();
    const auto& D = J.space()->slope_gram();
    const double expect = 0.5 * f.c.dot(K * f.c) - 0.5 * f.c.dot(D * f.c);
    CHECK(J.energy(f).total == test::rel(expect, 1e-13));
    const Eigen::VectorXd g = J.gradient(f.c);
    CHECK((g - (K - D) * f.c).norm() <= 1e-12 * (K * f.c).norm());
    CHECK((J.hessian(f.c) - (K - D)).norm() <= 1e-6 * K.norm());
}

TEST_CASE("gradient matches central differences") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 8; ++trial) {
        const double scale = std::pow(10.0, -2.0 + trial * 0.5);
        const Field f = random_field(J.space(), rng) * scale;
        const Field v = random_field(J.space(), rng);
        const double tau = 1e-6 * norm_E(f);
        const double fd = (J.energy(f.c + tau * v.c).total - J.energy(f.c - tau * v.c).total) / (2 * tau);
        const double an = J.gradient(f.c).dot(v.c);
        CAPTURE(scale);
        CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an));
    }
}

TEST_CASE("evenness at epsilon = 0") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const Field f = random_field(J.space(), rng) * (0.1 + trial);
        const double e = J.energy(f).total;
        CHECK(std::abs(e - J.energy(-f).total) <= 1e-13 * (1 + std::abs(e)));
        CHECK((J.gradient(f.c) + J.gradient(-f.c)).norm() <= 1e-10);
    }
    CHECK(J.energy(Field::zero(J.space())).total == 0.0);
    CHECK(J.gradient(Field::zero(J.space()).c).norm() == 0.0);
}

TEST_CASE("Hessian products") {
    const Functional J = Functional::make(test::load("example4.prob"), 2);
    std::mt19937_64 rng(6);
    const Field f = random_field(J.space(), rng) * 0.2;
    const Eigen::MatrixXd H = J.hessian(f.c);
    CHECK((H - H.transpose()).norm() == 0.0);
    const Field v = random_field(J.space(), rng);
    CHECK((J.hessian_vec(f.c, v.c) - H * v.c).norm() <= 1e-4 * (H * v.c).norm());
    CHECK_THROWS_AS(J.hessian_vec(f.c, v.c, 1e-2), std::invalid_argument);
    CHECK_THROWS_AS(J.hessian_vec(f.c, v.c, 1e-10), std::invalid_argument);
}

TEST_CASE("perturbation band and C0") {
    const ProblemSpec s = test::load("example4_g1.prob");
    const Functional J0 = Functional::make(s, 4);
    CHECK(J0.epsilon() == 0.0);
    // C0 = (N + 1) T max_{|u| <= delta} |m(u) u| for g = 1.
    double mmax = 0.0;
    const CutoffProfile m(0.9);
    for (int k = 0; k <= 200000; ++k) {
        const double u = 0.9 * k / 200000;
        mmax = std::max(mmax, m.m(u) * u);
    }
    CHECK(J0.C0() == test::rel(3.0 * mmax, 1e-4));
    CHECK(J0.C0() <= 3.0 * mmax);

    std::mt19937_64 rng(12);
    for (double eps : {1e-3, 1e-2, 1e-1, -0.5}) {
        const Functional J = J0.with_epsilon(eps);
        CHECK(J.epsilon() == eps);
        for (int trial = 0; trial < 10; ++trial) {
            const Field f = random_field(J.space(), rng) * std::pow(10.0, -2 + trial * 0.4);
            const PerturbationGap pg = J.perturbation_gap(f.c);
            CHECK(pg.holds);
            CHECK(pg.bound == doctest::Approx(std::abs(eps) * J0.C0()));
            const EnergyBreakdown e = J.energy(f);
            // The gap is a difference of totals, so its roundoff scales with |J|.
            CHECK(std::abs(pg.gap - std::abs(e.g_term)) <= 1e-14 * (1 + std::abs(e.total)));
        }
    }
    // Without g the band collapses.
    const Functional Jz = Functional::make(test::load("example4.prob"), 2).with_epsilon(0.3);
    CHECK(Jz.C0() == 0.0);
    Field f = random_field(Jz.space(), rng);
    CHECK(Jz.perturbation_gap(f.c).gap == 0.0);
}

TEST_CASE("growth bounds and coercivity floor") {
    const ProblemSpec base = test::load("example4.prob");
    std::mt19937_64 rng(19);
    for (double beta : {-1.0, 0.0, 1.9}) {
        ProblemSpec s = base;
        s.beta = beta;
        const Functional J = Functional::make(s, 4);
        for (int trial = 0; trial < 30; ++trial) {
            const double r = std::pow(10.0, -3.0 + 6.0 * trial / 29.0);
            const Field f = random_field(J.space(), rng) * r;
            const EnergyBreakdown e = J.energy(f);
            CAPTURE(beta);
            CAPTURE(r);
            CHECK(std::abs(e.f_term) <= J.f_growth_bound(r));
            CHECK(std::abs(e.impulse_term) <= J.impulse_growth_bound(r));
            CHECK(e.total >= J.coercivity_floor(r));
        }
        CHECK(J.coercivity_floor(1e6) > 0.0);
    }
}
