#include "chstep/diag.hpp"

#include "chstep/driver.hpp"
#include "chstep/experiment.hpp"
#include "chstep/problem.hpp"

#include <doctest.h>

#include <cmath>

using namespace chstep;

TEST_SUITE_BEGIN("diag");

TEST_CASE("discrete energy") {
    SUBCASE("pure phase has zero energy") {
        const GridSpec spec(4, 4, 4.0, 4.0);
        CHECK(discrete_energy(spec, 0.96, StateVector::Constant(16, 1.0)) == 0.0);
    }
    SUBCASE("zero state stores only well energy") {
        const GridSpec spec(4, 4, 4.0, 4.0);
        CHECK(discrete_energy(spec, 0.96, StateVector::Zero(16)) ==
              doctest::Approx(16.0 * 0.25).epsilon(1e-15));
    }
    SUBCASE("2x1 interface: only the x-difference contributes") {
        const GridSpec spec(2, 1, 2.0, 1.0);
        StateVector y(2);
        y << 1.0, -1.0;
        CHECK(discrete_energy(spec, 1.0, y) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("constant states give hx hy N F(c) exactly") {
        const GridSpec spec(5, 3, 64.0, 48.0);
        for (const double c : {-0.7, 0.0, 0.3, 2.0}) {
            const double want = spec.hx() * spec.hy() * spec.size() * free_energy(c);
            CHECK(discrete_energy(spec, 0.96, StateVector::Constant(spec.size(), c)) ==
                  doctest::Approx(want).epsilon(1e-15));
        }
    }
    SUBCASE("dimension mismatch rejected") {
        CHECK_THROWS_AS(discrete_energy(GridSpec(4, 4, 4.0, 4.0), 1.0, StateVector::Zero(3)),
                        std::invalid_argument);
    }
}

TEST_CASE("mass deviation") {
    StateVector y0(3);
    y0 << 1.0, 2.0, 3.0;
    CHECK(mass_deviation(y0, y0) == 0.0);
    CHECK(mass_deviation(1.01 * 6.0, 6.0) == doctest::Approx(0.01).epsilon(1e-12));

    bool absolute = false;
    const double dev = mass_deviation(StateVector::Constant(3, 0.5), StateVector::Zero(3),
                                      &absolute);
    CHECK(absolute);
    CHECK(dev == doctest::Approx(1.5));
}

TEST_CASE("relative error") {
    StateVector ref(3);
    ref << 1.0, 0.0, 0.0;
    CHECK(relative_error(ref, ref) == 0.0);
    CHECK(relative_error(2.0 * ref, ref) == doctest::Approx(1.0));
    StateVector shifted = ref;
    shifted[1] += 1e-3;
    CHECK(relative_error(shifted, ref) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK_THROWS_AS(relative_error(ref, StateVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("diagnostic series enforces increasing times") {
    DiagnosticSeries series;
    series.append(0.0, 1.0, 0.0, 0.0, 0);
    series.append(0.5, 0.9, 1e-14, 0.5, 10);
    CHECK(series.size() == 2);
    CHECK_THROWS_AS(series.append(0.5, 0.8, 0.0, 0.1, 20), std::invalid_argument);
}

TEST_CASE("energy decays after the initial transient on a benchmark run") {
    const GridSpec spec(32, 32, 64.0, 64.0);
    CahnHilliardProblem problem(build_laplacian(spec), epsilon_m(1.0, 4), false);
    const StateVector y0 = initial_condition(spec, 137);

    SolverConfig config;
    config.scheme = Scheme::LIM;
    config.adaptive = true;
    config.tau0 = 0.5;
    config.T = 30.0;
    config.tol = 1e-3;
    const RunResult result = run_adaptive_lim(problem, config, y0);
    const double budget = 1e-6 * result.records.front().energy;
    for (std::size_t i = 1; i < result.records.size(); ++i) {
        if (result.records[i - 1].t <= 10.0)
            continue;
        CHECK(result.records[i].energy <= result.records[i - 1].energy + budget);
    }
}

TEST_SUITE_END();
