#include "chstep/lim.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace chstep;
namespace oracle = chstep::testing;

namespace {

constexpr double pi = 3.14159265358979323846;

CahnHilliardProblem make_problem(int n, double epsilon, bool eyre) {
    return CahnHilliardProblem(build_laplacian(GridSpec(n, n, n * 1.0, n * 1.0)), epsilon, eyre);
}

}  // namespace

TEST_SUITE_BEGIN("lim");

TEST_CASE("chebyshev_order formula") {
    CHECK(chebyshev_order(1.0, 0.0) == 1);   // ceil(0.5)
    CHECK(chebyshev_order(1.0, 1.0) == 1);   // atan(1) = pi/4
    CHECK(chebyshev_order(1.0, 10000.0) == 79);
    CHECK(chebyshev_order(0.5, 20000.0) == 79);  // depends only on dt*lambda

    CHECK_THROWS_AS(chebyshev_order(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(chebyshev_order(1.0, -1.0), std::invalid_argument);

    // p <= ceil((pi/4) sqrt(x + 1)) and p >= 0.9 (pi/4) sqrt(x)
    for (const double x : {1e2, 1e4, 1e6}) {
        const int p = chebyshev_order(1.0, x);
        CHECK(p <= static_cast<int>(std::ceil(pi / 4.0 * std::sqrt(x + 1.0))));
        CHECK(p >= 0.9 * pi / 4.0 * std::sqrt(x));
    }
}

TEST_CASE("schedule construction") {
    SUBCASE("p = 1") {
        const ChebyshevSchedule s = build_schedule(0.5, 1.0);
        REQUIRE(s.order == 1);
        CHECK(s.roots[0] == doctest::Approx(std::cos(pi / 2.0)));
        CHECK(s.coeffs[0] == 0.0);  // exactly, by construction
    }
    SUBCASE("p = 2 roots") {
        const ChebyshevSchedule s = build_schedule(1.0, 2.5);
        REQUIRE(s.order == 2);
        CHECK(s.roots[0] == doctest::Approx(std::sqrt(2.0) / 2.0));
        CHECK(s.roots[1] == doctest::Approx(-std::sqrt(2.0) / 2.0));
    }
    SUBCASE("p = 3 coefficients against the defining formula") {
        // dt*lambda = 8 gives p = 3
        const double lambda = 8.0;
        const ChebyshevSchedule s = build_schedule(1.0, lambda);
        REQUIRE(s.order == 3);
        const double z1 = std::cos(pi / 6.0);
        for (int m = 0; m < 3; ++m) {
            const double beta = std::cos(pi * (2 * m + 1) / 6.0);
            CHECK(s.roots[m] == doctest::Approx(beta).epsilon(1e-15));
            CHECK(s.coeffs[m] == doctest::Approx(lambda / (1.0 + z1) * (z1 - beta)).epsilon(1e-15));
        }
    }
    SUBCASE("invariants: a_1 = 0, all coefficients nonnegative, roots decreasing") {
        std::mt19937_64 engine(43);
        std::uniform_real_distribution<double> dist(0.0, 1e6);
        for (int trial = 0; trial < 50; ++trial) {
            const ChebyshevSchedule s = build_schedule(1.0, dist(engine));
            CHECK(s.coeffs[0] == 0.0);
            for (int m = 0; m < s.order; ++m)
                CHECK(s.coeffs[static_cast<std::size_t>(m)] >= 0.0);
            for (int m = 1; m < s.order; ++m)
                CHECK(s.roots[static_cast<std::size_t>(m)] < s.roots[static_cast<std::size_t>(m - 1)]);
        }
    }
}

TEST_CASE("p = 1 reduces to the explicit Euler step bit-for-bit") {
    const CahnHilliardProblem problem = make_problem(4, 0.3, false);
    std::mt19937_64 engine(47);
    const StateVector y = oracle::random_vector(engine, problem.size(), -0.5, 0.5);
    const LinearizedSystem sys = linearize(problem, y);
    const double dt = 0.5 / sys.one_norm();  // dt * lambda <= 1 forces p = 1
    REQUIRE(chebyshev_order(dt, sys.one_norm()) == 1);

    const StateVector got = lim_step(sys, y, dt);
    const StateVector euler = y + dt * (sys.forcing() - sys.apply(y));
    for (int i = 0; i < got.size(); ++i)
        CHECK(got[i] == euler[i]);
}

TEST_CASE("stationary state of the frozen model is a fixed point for any p") {
    std::mt19937_64 engine(53);
    const int n = 12;
    for (const double lambda : {1.0, 30.0, 500.0}) {
        const Eigen::MatrixXd a_hat = oracle::random_spd(engine, n, lambda);
        const StateVector y = oracle::random_vector(engine, n, -1.0, 1.0);
        const StateVector g = a_hat * y;  // g = A_hat y: the IVP is stationary
        const ChebyshevSchedule schedule = build_schedule(1.0, lambda);
        const StateVector got = lim_iterate(
            [&a_hat](const StateVector& v) { return StateVector(a_hat * v); }, g, y, 1.0,
            schedule);
        CHECK((got - y).norm() <= 1e-13 * y.norm());
    }
}

TEST_CASE("matches the dense transliteration at dt*lambda about 50") {
    std::mt19937_64 engine(59);
    const GridSpec spec(4, 4, 4.0, 4.0);
    const Eigen::MatrixXd dense_a = oracle::dense_laplacian(spec);
    for (const bool eyre : {false, true}) {
        const CahnHilliardProblem problem(build_laplacian(spec), 0.96, eyre);
        const StateVector y = oracle::random_vector(engine, problem.size(), -1.0, 1.0);
        const LinearizedSystem sys = linearize(problem, y);
        const double lambda = sys.one_norm();
        const double dt = 50.0 / lambda;

        const StateVector got = lim_step(sys, y, dt);
        const Eigen::MatrixXd dense_hat = oracle::dense_a_hat(dense_a, y, 0.96, eyre);
        const StateVector want =
            oracle::dense_lim_step(dense_hat, oracle::dense_forcing(dense_a, y, eyre), y, dt,
                                   lambda);
        CHECK((got - want).norm() <= 1e-12 * (want.norm() + 1.0));
    }
}

TEST_CASE("matvec count is exactly 2p - 1") {
    const CahnHilliardProblem problem = make_problem(5, 0.96, false);
    std::mt19937_64 engine(61);
    const StateVector y = oracle::random_vector(engine, problem.size(), -1.0, 1.0);
    for (const double factor : {0.5, 10.0, 300.0}) {
        const LinearizedSystem sys = linearize(problem, y);
        const double dt = factor / sys.one_norm();
        const int p = chebyshev_order(dt, sys.one_norm());
        (void)lim_step(sys, y, dt);
        CHECK(sys.matvec_count() == static_cast<std::uint64_t>(2 * p - 1));
    }
}

TEST_CASE("no growth on random SPD systems") {
    // amplification stays bounded: ||y_next|| <= ||y_n|| + dt ||g|| C
    std::mt19937_64 engine(67);
    const int n = 10;
    for (int trial = 0; trial < 100; ++trial) {
        const double lambda = std::pow(10.0, 1.0 + 3.0 * (trial % 4) / 3.0);
        const Eigen::MatrixXd a_hat = oracle::random_spd(engine, n, lambda);
        const StateVector y = oracle::random_vector(engine, n, -1.0, 1.0);
        const StateVector g = oracle::random_vector(engine, n, -1.0, 1.0);
        const double dt = 10.0 / lambda;
        const ChebyshevSchedule schedule = build_schedule(dt, lambda);
        const StateVector got = lim_iterate(
            [&a_hat](const StateVector& v) { return StateVector(a_hat * v); }, g, y, dt,
            schedule);
        CHECK(got.norm() <= y.norm() + dt * g.norm() * 10.0 + 1e-12);
    }
}

TEST_CASE("blow-up is reported, not propagated") {
    // run the iteration with a wildly underestimated spectral bound so the
    // explicit iterations are unstable
    std::mt19937_64 engine(71);
    const int n = 10;
    const Eigen::MatrixXd a_hat = oracle::random_spd(engine, n, 1e8);
    const StateVector y = oracle::random_vector(engine, n, -1.0, 1.0);
    const StateVector g = StateVector::Zero(n);
    const ChebyshevSchedule schedule = build_schedule(1e4, 0.14);  // p about 30
    CHECK_THROWS_AS(lim_iterate([&a_hat](const StateVector& v) { return StateVector(a_hat * v); },
                                g, y, 1e4, schedule),
                    SolverError);
}

TEST_CASE("invalid step size") {
    const CahnHilliardProblem problem = make_problem(3, 0.5, false);
    const LinearizedSystem sys = linearize(problem, StateVector::Zero(9));
    CHECK_THROWS_AS(lim_step(sys, StateVector::Zero(9), 0.0), std::invalid_argument);
}

TEST_SUITE_END();
