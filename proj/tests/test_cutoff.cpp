#include <cmath>
#include <random>

#include "doctest.h"
#include "impvar/cutoff.hpp"
#include "support.hpp"

using namespace impvar;

namespace {

// Independent reference: smoothstep blend in |s| between delta/2 and delta.
double m_ref(double s, double d) {
    const double a = std::abs(s);
    if (a <= d / 2) return 1.0;
    if (a >= d) return 0.0;
    const double x = 2.0 * a / d - 1.0;
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

struct Example {
    ProblemSpec spec = test::load("example4.prob");
    WeightProfile w = build_weight_profile(spec);
    ModifiedNonlinearity mn{spec, w};
};

}  // namespace

TEST_CASE("cut-off profile") {
    const double d = 0.9;
    const CutoffProfile m(d);
    CHECK(m.m(0.0) == 1.0);
    CHECK(m.m(0.45) == 1.0);
    CHECK(m.m(-0.45) == 1.0);
    CHECK(m.m(0.675) == test::rel(0.5, 1e-15));
    CHECK(m.m(0.9) == 0.0);
    CHECK(m.m(-5.0) == 0.0);
    CHECK(m.max_abs_m_prime() == doctest::Approx(3.0 / d));
    CHECK(std::abs(m.m_prime(0.675)) == test::rel(3.0 / d, 1e-14));

    double prev = 1.0;
    for (int k = 0; k <= 2000; ++k) {
        const double s = -1.2 + 2.4 * k / 2000;
        CHECK(m.m(s) == test::rel(m_ref(s, d), 1e-14));
        CHECK(m.m(s) == m.m(-s));
        CHECK(std::abs(m.m_prime(s)) <= 3.0 / d * (1 + 1e-14));
        const double h = 1e-6;
        // m'' jumps at |s| = delta/2 and delta, which limits the difference quotient there.
        CHECK(std::abs(m.m_prime(s) - (m_ref(s + h, d) - m_ref(s - h, d)) / (2 * h)) <= 2e-5);
        if (s >= 0) {
            CHECK(m.m(s) <= prev);
            prev = m.m(s);
        }
    }
}

TEST_CASE("constants of the example") {
    Example ex;
    CHECK(ex.mn.A0() == test::rel(3.0, 1e-15));
    CHECK(ex.mn.A1() == test::rel(5.5, 1e-15));
    CHECK(ex.mn.intervals() == 3);
    CHECK(ex.mn.impulses() == 2);
    CHECK(ex.mn.impulse_weight(0) == test::rel(std::exp(0.2), 1e-14));
    CHECK(ex.mn.impulse_weight(1) == test::rel(std::exp(0.6), 1e-14));
}

TEST_CASE("modified nonlinearities agree with closed forms") {
    Example ex;
    const double d = 0.9, as = 0.56;
    for (double u : {-0.9, -0.6, -0.45, -0.1, 0.0, 1e-9, 0.3, 0.45, 0.7, 0.9, 2.5}) {
        CAPTURE(u);
        const double a = std::abs(u);
        const double F0 = 2.0 / 3.0 * std::pow(a, 1.5);
        const double m = m_ref(u, d);
        CHECK(ex.mn.F(0, 0.1, u) == test::rel(F0, 1e-12));
        CHECK(ex.mn.F_tilde(0, 0.1, u) ==
              test::rel(m * F0 + (1 - m) * as * std::pow(a, 1.5), 1e-12));
        if (a <= d / 2) {
            CHECK(ex.mn.I_hat(0, u) == test::rel(std::exp(0.2) * F0, 1e-12));
            CHECK(ex.mn.I_hat(1, u) == test::rel(std::exp(0.6) * 0.75 * std::pow(a, 4.0 / 3.0), 1e-12));
            CHECK(ex.mn.I_tilde(1, u) == ex.mn.I(1, u));
        }
        if (a >= d) {
            CHECK(ex.mn.I_tilde(0, u) == 0.0);
            CHECK(ex.mn.F_tilde(2, 0.9, u) == test::rel(as * std::pow(a, 1.5), 1e-14));
        }
    }
    // I^ is flat beyond delta.
    CHECK(ex.mn.I_hat(1, 0.9) == test::rel(ex.mn.I_hat(1, 3.0), 1e-14));
}

TEST_CASE("f~ and I~ are the u-derivatives of F~ and I^") {
    Example ex;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.2, 1.2), Tt(0.0, 1.0);
    for (int n = 0; n < 400; ++n) {
        const double u = U(rng);
        if (std::abs(u) < 1e-3) continue;
        const double t = Tt(rng);
        const std::size_t i = n % 3;
        const double h = 1e-6;
        const double fd = (ex.mn.F_tilde(i, t, u + h) - ex.mn.F_tilde(i, t, u - h)) / (2 * h);
        CHECK(ex.mn.f_tilde(i, t, u) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        const std::size_t k = n % 2;
        const double fdI = (ex.mn.I_hat(k, u + h) - ex.mn.I_hat(k, u - h)) / (2 * h);
        CHECK(ex.mn.impulse_weight(k) * ex.mn.I_tilde(k, u) == doctest::Approx(fdI).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("F~ is continuous across the blend region") {
    Example ex;
    for (double edge : {0.45, 0.9}) {
        for (double sgn : {-1.0, 1.0}) {
            const double u = sgn * edge;
            CHECK(ex.mn.F_tilde(1, 0.5, u * (1 + 1e-12)) == doctest::Approx(ex.mn.F_tilde(1, 0.5, u * (1 - 1e-12))));
            CHECK(ex.mn.f_tilde(1, 0.5, u * (1 + 1e-12)) == doctest::Approx(ex.mn.f_tilde(1, 0.5, u * (1 - 1e-12))));
        }
    }
}

TEST_CASE("g variant: G~ = m u") {
    const ProblemSpec s = test::load("example4_g1.prob");
    const WeightProfile w = build_weight_profile(s);
    const ModifiedNonlinearity mn(s, w);
    for (double u : {-1.0, -0.7, -0.2, 0.0, 0.5, 0.8, 1.5}) {
        CHECK(mn.G_tilde(0, 0.1, u) == test::rel(m_ref(u, 0.9) * u, 1e-12));
        CHECK(mn.g_tilde(2, 0.9, u) ==
              doctest::Approx(m_ref(u, 0.9) + CutoffProfile(0.9).m_prime(u) * u).epsilon(1e-12).scale(1.0));
    }
    CHECK(audit_derived_conditions(mn, s, 3000).overall());
}

TEST_CASE("derived-condition audit on the example") {
    Example ex;
    const AuditReport rep = audit_derived_conditions(ex.mn, ex.spec, 10000);
    CHECK(rep.overall());
    for (const char* id : {"F1'", "F2'(i)", "F2'(ii)", "F2'(iii)", "F3'", "F4'", "F4'-int", "I1'", "I2'", "I3'(i)",
                           "I3'(ii)", "G'"}) {
        CAPTURE(id);
        REQUIRE(rep.find(id) != nullptr);
        CHECK(rep.find(id)->pass);
    }
    CHECK(rep.find("F2'(i)")->worst_margin > 0.0);
    CHECK(rep.find("F3'")->indicative);
}

TEST_CASE("derived audit catches a broken impulse") {
    // An even impulse breaks I1' after the cut-off as well.
    const ProblemSpec s = test::load("even_impulse.prob");
    const WeightProfile w = build_weight_profile(s);
    const ModifiedNonlinearity mn(s, w);
    const AuditReport rep = audit_derived_conditions(mn, s, 2000);
    CHECK_FALSE(rep.find("I1'")->pass);
    CHECK_FALSE(rep.overall());
}
