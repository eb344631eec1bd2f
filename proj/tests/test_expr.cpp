#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "impvar/errors.hpp"
#include "impvar/expr.hpp"
#include "support.hpp"

using impvar::EvalError;
using impvar::Expr;
using impvar::ParseError;

namespace {

double ev(const std::string& s, double t = 0.0, double u = 0.0) { return Expr::parse(s)(t, u); }

std::size_t error_offset(const std::string& s) {
    try {
        Expr::parse(s);
    } catch (const ParseError& e) {
        return e.offset();
    }
    FAIL("no ParseError for '" << s << "'");
    return 0;
}

}  // namespace

TEST_CASE("precedence and associativity") {
    CHECK(ev("1 + 2 * 3") == 7.0);
    CHECK(ev("1 - 2 - 3") == -4.0);
    CHECK(ev("8 / 2 / 2") == 2.0);
    CHECK(ev("2 ^ 3 ^ 2") == 512.0);
    CHECK(ev("-2 ^ 2") == -4.0);
    CHECK(ev("2 ^ -1") == 0.5);
    CHECK(ev("2 * -3") == -6.0);
    CHECK(ev("(1 + 2) * 3") == 9.0);
    CHECK(ev("+4") == 4.0);
    CHECK(ev("1.5e2 + .5") == 150.5);
}

TEST_CASE("variables, constants and functions") {
    CHECK(ev("t * u", 2.0, 3.0) == 6.0);
    CHECK(ev("pi") == impvar::test::rel(M_PI, 1e-15));
    CHECK(ev("sin(pi / 2)") == doctest::Approx(1.0));
    CHECK(ev("cos(0)") == 1.0);
    CHECK(ev("ln(exp(1.5))") == impvar::test::rel(1.5, 1e-15));
    CHECK(ev("sqrt(16)") == 4.0);
    CHECK(ev("abs(u)", 0.0, -2.5) == 2.5);
    CHECK(ev("sign(u)", 0.0, -2.5) == -1.0);
    CHECK(ev("sign(u)", 0.0, 0.0) == 0.0);
    CHECK(ev("abs(u)^(-1/2)*u", 0.0, 0.25) == doctest::Approx(0.5));
    CHECK(ev("abs(u)^(-1/2)*u", 0.0, -0.25) == doctest::Approx(-0.5));
}

TEST_CASE("singular powers are finite at u = 0") {
    CHECK(ev("abs(u)^(-1/2)*u", 0.0, 0.0) == 0.0);
    CHECK(ev("abs(u)^(-2/3)*u", 0.0, 0.0) == 0.0);
    CHECK(ev("abs(u)^(-1/2)*u*(1 + 0.1*sin(abs(u)))", 0.3, 0.0) == 0.0);
    CHECK(ev("u * abs(u)^(-1/2) + 1", 0.0, 0.0) == 1.0);
    // Continuity from both sides.
    for (double u : {1e-8, -1e-8, 1e-14}) {
        const double v = ev("abs(u)^(-1/2)*u", 0.0, u);
        CHECK(std::abs(v) == doctest::Approx(std::sqrt(std::abs(u))));
        CHECK(std::signbit(v) == std::signbit(u));
    }
    CHECK_THROWS_AS(ev("1/u", 0.0, 0.0), EvalError);
    CHECK_THROWS_AS(ev("abs(u)^(-1/2)", 0.0, 0.0), EvalError);
}

TEST_CASE("domain errors name the operation") {
    auto message = [](const std::string& s, double u) -> std::string {
        try {
            ev(s, 0.0, u);
        } catch (const EvalError& e) {
            return e.what();
        }
        return {};
    };
    CHECK(message("ln(u)", -1.0).find("ln") != std::string::npos);
    CHECK(message("sqrt(u)", -1.0).find("sqrt") != std::string::npos);
    CHECK_FALSE(message("u^0.5", -2.0).empty());
    CHECK_FALSE(message("1/(t - t)", 1.0).empty());
    CHECK(message("ln(u)", 2.0).empty());
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK(error_offset("2 +") == 3);
    CHECK(error_offset("foo(u)") == 0);
    CHECK(error_offset("u + bar") == 4);
    CHECK(error_offset("(u") == 2);
    CHECK(error_offset("u u") == 2);
    CHECK(error_offset("") == 0);
    CHECK(error_offset("sin u") == 4);
    CHECK(error_offset("1 + $") == 4);
    try {
        Expr::parse("u * * 2");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("at byte 4") != std::string::npos);
    }
}

TEST_CASE("print round-trips") {
    const std::vector<std::string> sources = {
        "abs(u)^(-1/2)*u*(1 + 0.1*sin(abs(u)))",
        "-2^2 + t*u - (u - t) / 3",
        "2^3^u",
        "exp(-t) * cos(pi*u) + sqrt(abs(u)) - ln(2 + t)",
        "sign(u) * abs(u)^(1/3) - -u",
        "0.1 + 1e-3*u"};
    for (const auto& s : sources) {
        const Expr a = Expr::parse(s);
        const Expr b = Expr::parse(a.print());
        CHECK(b.print() == a.print());
        for (double t : {0.0, 0.3, 1.0})
            for (double u : {-0.7, -1e-6, 0.0, 0.25, 1.3}) {
                CAPTURE(s);
                CHECK(a(t, u) == b(t, u));
            }
    }
    CHECK(Expr::parse("u+1").source() == "u+1");
    CHECK(impvar::print(impvar::parse("1.25")) == Expr::constant(1.25).print());
}

TEST_CASE("dependency queries") {
    CHECK(Expr::parse("u * t").depends_on_u());
    CHECK(Expr::parse("u * t").depends_on_t());
    CHECK_FALSE(Expr::parse("sin(t)").depends_on_u());
    CHECK_FALSE(Expr::parse("u^2").depends_on_t());
    CHECK(Expr().is_zero());
    CHECK(Expr::parse("0").is_zero());
    CHECK_FALSE(Expr::parse("0*u + 1").is_zero());
    CHECK(Expr()(0.4, 7.0) == 0.0);
}

TEST_CASE("antiderivative in u") {
    const Expr f = Expr::parse("abs(u)^(-1/2)*u");
    for (double u : {-0.9, -0.2, 1e-6, 0.45, 0.9}) {
        const double exact = 2.0 / 3.0 * std::pow(std::abs(u), 1.5);
        CHECK(std::abs(impvar::antiderivative_in_u(f, 0.0, u) - exact) <= 1e-12);
    }
    const Expr g = Expr::parse("t * cos(u)");
    CHECK(impvar::antiderivative_in_u(g, 2.0, 0.5) == impvar::test::rel(2.0 * std::sin(0.5), 1e-12));
    CHECK(impvar::antiderivative_in_u(g, 2.0, 0.0) == 0.0);
}
