#include "chstep/diag.hpp"
#include "chstep/driver.hpp"
#include "chstep/experiment.hpp"
#include "chstep/krylov.hpp"
#include "chstep/lim.hpp"

#include <benchmark/benchmark.h>

using namespace chstep;

namespace {

CahnHilliardProblem make_problem(int n, bool eyre) {
    return CahnHilliardProblem(build_laplacian(GridSpec(n, n, 64.0, 64.0)),
                               epsilon_m(1.0, 4), eyre);
}

StateVector coarsened_state(const CahnHilliardProblem& problem, double t) {
    const StateVector y0 = initial_condition(problem.A.spec(), 1);
    SolverConfig config;
    config.scheme = Scheme::EE2;
    config.adaptive = true;
    config.tau0 = 1.0;
    config.T = t;
    config.tol = 1e-3;
    config.m_max = 30;
    return run(problem, config, y0, 0).y_final;
}

}  // namespace

static void BM_LaplacianApply(benchmark::State& state) {
    const auto problem = make_problem(static_cast<int>(state.range(0)), false);
    const StateVector v = StateVector::Random(problem.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(problem.A.apply(v));
    state.SetItemsProcessed(state.iterations() * problem.size());
}
BENCHMARK(BM_LaplacianApply)->Arg(64)->Arg(128)->Arg(192);

static void BM_LinearizedApply(benchmark::State& state) {
    const auto problem = make_problem(static_cast<int>(state.range(0)), false);
    const LinearizedSystem sys = linearize(problem, coarsened_state(problem, 5.0));
    const StateVector v = StateVector::Random(problem.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(sys.apply(v));
    state.SetItemsProcessed(state.iterations() * problem.size());
}
BENCHMARK(BM_LinearizedApply)->Arg(64)->Arg(128);

static void BM_ExactOneNorm(benchmark::State& state) {
    const auto problem = make_problem(static_cast<int>(state.range(0)), false);
    const StateVector y = coarsened_state(problem, 5.0);
    for (auto _ : state) {
        const LinearizedSystem sys = linearize(problem, y);
        benchmark::DoNotOptimize(sys.one_norm());
    }
}
BENCHMARK(BM_ExactOneNorm)->Arg(64)->Arg(128);

static void BM_LimStep(benchmark::State& state) {
    const auto problem = make_problem(64, false);
    const StateVector y = coarsened_state(problem, 5.0);
    const LinearizedSystem sys = linearize(problem, y);
    const double dt = static_cast<double>(state.range(0)) / sys.one_norm();
    for (auto _ : state)
        benchmark::DoNotOptimize(lim_step(sys, y, dt));
    state.counters["p"] = chebyshev_order(dt, sys.one_norm());
}
BENCHMARK(BM_LimStep)->Arg(1)->Arg(30)->Arg(300);

static void BM_Ee2KrylovStep(benchmark::State& state) {
    const auto problem = make_problem(64, false);
    const StateVector y = coarsened_state(problem, 5.0);
    const LinearizedSystem sys = linearize(problem, y);
    const StateVector r0 = sys.residual0(y);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ee2_krylov_step(sys, y, 0.5, 1e-4, static_cast<int>(state.range(0)), &r0));
}
BENCHMARK(BM_Ee2KrylovStep)->Arg(10)->Arg(30);

static void BM_PhiDense(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, n);
    for (auto _ : state)
        benchmark::DoNotOptimize(phi_dense(m));
}
BENCHMARK(BM_PhiDense)->Arg(10)->Arg(30)->Arg(100);

static void BM_DiscreteEnergy(benchmark::State& state) {
    const auto problem = make_problem(static_cast<int>(state.range(0)), false);
    const StateVector y = coarsened_state(problem, 5.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(discrete_energy(problem.A.spec(), problem.epsilon, y));
}
BENCHMARK(BM_DiscreteEnergy)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
