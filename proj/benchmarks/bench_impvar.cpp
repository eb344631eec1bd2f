#include <benchmark/benchmark.h>

#include <random>

#include "impvar/expr.hpp"
#include "impvar/fem_space.hpp"
#include "impvar/fibering.hpp"
#include "impvar/functional.hpp"
#include "impvar/problem_file.hpp"

namespace {

using namespace impvar;

const Functional& example4(int per_segment) {
    static const ProblemSpec spec = example4_spec();
    static const Functional j4 = Functional::make(spec, 4);
    static const Functional j8 = Functional::make(spec, 8);
    static const Functional j16 = Functional::make(spec, 16);
    return per_segment == 4 ? j4 : per_segment == 8 ? j8 : j16;
}

Eigen::VectorXd sample(const Functional& J) {
    std::mt19937_64 rng(7);
    return random_field(J.space(), rng).c;
}

void BM_ExprEval(benchmark::State& state) {
    const Expr e = Expr::parse("abs(u)^(-1/2)*u*(1 + 0.1*sin(abs(u)))");
    double u = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(e(0.5, u));
        u = u > 1.0 ? 0.3 : u + 1e-3;
    }
}
BENCHMARK(BM_ExprEval);

void BM_Energy(benchmark::State& state) {
    const Functional& J = example4(static_cast<int>(state.range(0)));
    const Eigen::VectorXd c = sample(J);
    for (auto _ : state) benchmark::DoNotOptimize(J.energy(c).total);
    state.counters["dofs"] = static_cast<double>(c.size());
}
BENCHMARK(BM_Energy)->Arg(4)->Arg(8)->Arg(16);

void BM_Gradient(benchmark::State& state) {
    const Functional& J = example4(static_cast<int>(state.range(0)));
    const Eigen::VectorXd c = sample(J);
    for (auto _ : state) benchmark::DoNotOptimize(J.gradient(c).data());
}
BENCHMARK(BM_Gradient)->Arg(4)->Arg(8)->Arg(16);

void BM_Hessian(benchmark::State& state) {
    const Functional& J = example4(static_cast<int>(state.range(0)));
    const Eigen::VectorXd c = sample(J);
    for (auto _ : state) benchmark::DoNotOptimize(J.hessian(c).data());
}
BENCHMARK(BM_Hessian)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FindC(benchmark::State& state) {
    const Functional& J = example4(8);
    const Eigen::VectorXd c = sample(J);
    for (auto _ : state) benchmark::DoNotOptimize(find_c(J, c).c);
}
BENCHMARK(BM_FindC);

}  // namespace

BENCHMARK_MAIN();
