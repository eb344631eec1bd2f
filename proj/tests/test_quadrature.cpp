#include <cmath>

#include "doctest.h"
#include "impvar/quadrature.hpp"
#include "support.hpp"

using namespace impvar;

TEST_CASE("Gauss-Legendre rules") {
    const GaussRule r3 = gauss_legendre(3);
    REQUIRE(r3.nodes.size() == 3);
    double lo = 1.0;
    for (double x : r3.nodes) lo = std::min(lo, x);
    CHECK(lo == test::rel(-std::sqrt(0.6), 1e-15));
    for (int n : {1, 2, 5, 7, 12}) {
        const GaussRule r = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        CHECK(wsum == test::rel(2.0, 1e-14));
        // Exact for degree 2n - 1.
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
            const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
            CAPTURE(n);
            CAPTURE(p);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("adaptive Gauss-Kronrod") {
    auto sqrt_x = [](double x) { return std::sqrt(x); };
    const auto r = integrate(sqrt_x, 0.0, 1.0);
    CHECK(std::abs(r.value - 2.0 / 3.0) < 1e-12);
    CHECK(r.panels > 1);

    const auto inv = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-10, 0.0, 4000});
    CHECK(std::abs(inv.value - 2.0) < 1e-9);

    const auto back = integrate([](double x) { return std::exp(x); }, 1.0, 0.0);
    CHECK(back.value == test::rel(1.0 - std::exp(1.0), 1e-14));

    CHECK(integrate(sqrt_x, 0.5, 0.5).value == 0.0);

    AdaptiveOptions rel;
    rel.abs_tol = 0.0;
    rel.rel_tol = 1e-13;
    const auto big = integrate([](double x) { return 1e20 * std::pow(std::abs(x), 1.5); }, -1.0, 1.0, rel);
    CHECK(big.value == test::rel(0.8e20, 1e-12));
}

TEST_CASE("panel budget exhaustion throws") {
    AdaptiveOptions tight;
    tight.abs_tol = 1e-15;
    tight.max_panels = 3;
    try {
        integrate([](double x) { return std::sin(1.0 / x); }, 1e-3, 1.0, tight);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(e.achieved_error() > 1e-15);
    }
}
