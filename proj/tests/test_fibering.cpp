#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "impvar/errors.hpp"
#include "impvar/fibering.hpp"
#include "support.hpp"

using namespace impvar;

TEST_CASE("upsilon is the energy over c^2") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        const Field u = random_field(J.space(), rng);
        for (double c : {1e-6, 1e-3, 0.1, 1.0, 10.0}) {
            const FiberValue fv = upsilon(J, u.c, c);
            const double e = J.energy(u.c * c).total;
            CHECK(c * c * fv.upsilon == test::rel(e, 1e-12));
            CHECK(fv.upsilon == doctest::Approx(fv.P + fv.Q));
            CHECK(fv.Q <= 0.0);
        }
    }
    const Field zero = Field::zero(J.space());
    CHECK_THROWS_AS(upsilon(J, zero.c, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(upsilon(J, zero.c, -1.0), std::invalid_argument);
}

TEST_CASE("derivatives of P and Q match finite differences") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(2);
    const Field u = random_field(J.space(), rng);
    for (double c : {0.01, 0.3, 2.0}) {
        const double h = 1e-5 * c;
        const FiberValue a = upsilon(J, u.c, c - h), b = upsilon(J, u.c, c + h);
        const FiberDerivatives d = fiber_derivatives(J, u.c, c);
        CHECK(d.dP == test::rel((b.P - a.P) / (2 * h), 1e-6));
        CHECK(d.dQ == test::rel((b.Q - a.Q) / (2 * h), 1e-6));
        CHECK(d.dP > 0.0);
        CHECK(d.dQ >= 0.0);
    }
}

TEST_CASE("root and scaling law") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 4; ++trial) {
        const Field u = random_field(J.space(), rng);
        const FiberRoot r = find_c(J, u.c);
        CHECK(r.c > 0.0);
        const FiberValue at = upsilon(J, u.c, r.c);
        CHECK(std::abs(at.upsilon) <= 1e-10 * (1 + std::abs(at.P)));
        CHECK(r.residual <= 1e-10 * (1 + std::abs(r.P)));
        CHECK(upsilon(J, u.c, r.c * 0.9).upsilon < 0.0);
        CHECK(upsilon(J, u.c, r.c * 1.1).upsilon > 0.0);
        for (double alpha : {0.5, 2.0, 10.0}) {
            const FiberRoot s = find_c(J, alpha * u.c);
            CHECK(s.c == test::rel(r.c / alpha, 1e-8));
        }
        CHECK(find_c(J, -u.c).c == test::rel(r.c, 1e-8));
    }
}

TEST_CASE("certificate and scan") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    std::mt19937_64 rng(4);
    const Field u = random_field(J.space(), rng);
    const FiberCertificate cert = certify_fiber(J, u.c, 48);
    CHECK(cert.pass());
    REQUIRE(cert.scan.c.size() == 48);
    CHECK(cert.scan.c.front() == doctest::Approx(cert.scan.root.c / 100));
    CHECK(cert.scan.c.back() == doctest::Approx(cert.scan.root.c * 100));
    std::ostringstream os;
    write_fiber_csv(os, cert.scan);
    CHECK(os.str().rfind("c,upsilon,dP,dQ\n", 0) == 0);
    const std::string csv = os.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 49);
    CHECK_THROWS_AS(scan_fiber(J, u.c, 1), std::invalid_argument);
}

TEST_CASE("no root without sublinear terms") {
    // f = I = 0: Y_u > 0 for every c, so bracketing must fail.
    ProblemSpec s = test::load("example4.prob");
    s.f = {Expr(), Expr(), Expr()};
    s.impulses = {Expr(), Expr()};
    const Functional J = Functional::make(s, 2);
    std::mt19937_64 rng(5);
    const Field u = random_field(J.space(), rng);
    CHECK_THROWS_AS(find_c(J, u.c), FiberingError);
    CHECK_THROWS_AS(find_c(J, Field::zero(J.space()).c), FiberingError);
}
