#include <cmath>
#include <random>

#include "doctest.h"
#include "impvar/solver.hpp"
#include "support.hpp"

using namespace impvar;

TEST_CASE("deflation factor") {
    const Functional J = Functional::make(test::load("example4.prob"), 2);
    std::mt19937_64 rng(1);
    const Field a = random_field(J.space(), rng);
    const Deflation none(*J.space(), {}, 1.0, 2.0, 1.0);
    CHECK(none.empty());
    CHECK(none.factor(a.c) == 1.0);
    const Deflation d(*J.space(), {a.c}, 1.0, 2.0, 1.0);
    const Field near = a + random_field(J.space(), rng) * 1e-4;
    CHECK(d.factor(near.c) == test::rel(1e8 + 1, 1e-9));
    CHECK(d.factor(a.c * 1e6) == test::rel(1.0, 1e-10));
    // Gradient by central differences.
    const Field x = a * 1.7;
    const Field v = random_field(J.space(), rng);
    const auto [m, grad] = d.factor_and_gradient(x.c);
    const double h = 1e-6;
    const double fd = (d.factor(x.c + h * v.c) - d.factor(x.c - h * v.c)) / (2 * h);
    CHECK(m == d.factor(x.c));
    CHECK(grad.dot(v.c) == test::rel(fd, 1e-6));
}

TEST_CASE("distinctness is relative") {
    const Functional J = Functional::make(test::load("example4.prob"), 2);
    std::mt19937_64 rng(2);
    const Field a = random_field(J.space(), rng) * 10.0;
    const Field b = a + random_field(J.space(), rng) * 1e-6;
    CHECK_FALSE(distinct(*J.space(), a.c, b.c, 1e-6));
    CHECK(distinct(*J.space(), a.c, (-a).c, 1e-6));
    const Field tiny = random_field(J.space(), rng) * 1e-7;
    CHECK_FALSE(distinct(*J.space(), tiny.c, Field::zero(J.space()).c, 1e-6));
}

TEST_CASE("L-BFGS decreases the energy monotonically") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    SolverOptions opt;
    opt.method = DescentMethod::LBFGS;
    opt.grad_tol = 1e-8;
    const auto seeds = seed_starts(J, opt, false);
    REQUIRE_FALSE(seeds.empty());
    const DescentResult r = descend(J, seeds.front().start, {}, opt);
    REQUIRE(r.energy_history.size() >= 2);
    for (std::size_t i = 1; i < r.energy_history.size(); ++i)
        CHECK(r.energy_history[i] <= r.energy_history[i - 1]);
    CHECK(r.energy < 0.0);
    CHECK(r.converged);
}

TEST_CASE("Newton finds the ground state from the first mode") {
    const Functional J = Functional::make(test::load("example4.prob"), 8);
    SolverOptions opt;
    const auto seeds = seed_starts(J, opt, false);
    REQUIRE(seeds.size() == 12);
    CHECK(seeds.front().label == "+mode 1");
    const DescentResult r = descend(J, seeds.front().start, {}, opt);
    REQUIRE(r.converged);
    CHECK(r.grad_norm <= 1e-9 * (1 + std::abs(r.energy)));
    // Reference value of the lowest critical level at 8 elements per segment.
    CHECK(r.energy == test::rel(-1.26752483e-05, 1e-7));
    CHECK(norm_E(Field(J.space(), r.c)) == test::rel(7.292e-3, 1e-3));
}

TEST_CASE("multiplicity search at low resolution") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    SolverOptions opt;
    const SearchResult res = multiplicity_search(J, 3, opt);
    CHECK(res.found >= 3);
    CHECK_FALSE(res.shortfall);
    CHECK(res.pairs_complete(*J.space()));
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        const auto& p = res.points[i];
        CHECK(p.energy.total < 0.0);
        CHECK(p.grad_norm <= 1e-9 * (1 + std::abs(p.energy.total)));
        CHECK(p.accepted);
        CHECK_FALSE(p.trivial);
        CHECK(p.small_norm);
        if (i > 0) CHECK(res.points[i - 1].energy.total <= p.energy.total);
        for (std::size_t j = 0; j < i; ++j) CHECK(distinct(*J.space(), p.field.c, res.points[j].field.c, 1e-6));
    }
}

TEST_CASE("k = 0 and parallel seeds") {
    const Functional J = Functional::make(test::load("example4.prob"), 4);
    SolverOptions opt;
    const SearchResult none = multiplicity_search(J, 0, opt);
    CHECK(none.points.empty());
    CHECK_FALSE(none.shortfall);
    CHECK(none.seeds_tried == 0);
    CHECK_THROWS_AS(multiplicity_search(J, -1, opt), std::invalid_argument);

    opt.jobs = 3;
    const SearchResult par = multiplicity_search(J, 2, opt);
    CHECK(par.found >= 2);
    CHECK(par.pairs_complete(*J.space()));
}

TEST_CASE("small-solution filter") {
    const Functional J = Functional::make(test::load("example4.prob"), 2);
    std::mt19937_64 rng(3);
    std::vector<CriticalPoint> pts(3);
    pts[0].field = random_field(J.space(), rng) * 1e-9;
    pts[1].field = random_field(J.space(), rng);
    pts[1].field = pts[1].field * (0.3 / norm_inf(pts[1].field));
    pts[2].field = random_field(J.space(), rng);
    pts[2].field = pts[2].field * (0.6 / norm_inf(pts[2].field));
    small_solution_filter(pts, J);
    CHECK(pts[0].trivial);
    CHECK(pts[1].accepted);
    CHECK_FALSE(pts[1].trivial);
    CHECK_FALSE(pts[2].accepted);
    CHECK(pts[2].norm_inf == doctest::Approx(0.6));
    // ||u||_E <= delta / 2 forces ||u||_inf <= delta / 2 when H0 = 0.
    for (const auto& p : pts)
        if (p.small_norm) CHECK(p.norm_inf <= 0.45);
}
