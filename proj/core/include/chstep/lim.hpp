#pragma once

#include "chstep/problem.hpp"

#include <cmath>
#include <vector>

namespace chstep {

/// Chebyshev polynomial order  p = ceil( (pi/4) / (pi/2 - atan(sqrt(dt*lambda_max))) )
/// for step size dt and spectral upper bound lambda_max >= ||A_hat||.
/// p = 1 (plain explicit Euler) whenever dt*lambda_max <= 1.
int chebyshev_order(double dt, double lambda_max);

/// Parameters of one LIM step: the ordered Chebyshev roots and the derived
/// per-iteration coefficients.  coeffs[0] == 0 by construction, so p = 1
/// degenerates to an explicit Euler step.
struct ChebyshevSchedule {
    int order = 0;               // p
    double lambda_max = 0.0;
    std::vector<double> roots;   // cos(pi (2m - 1) / (2p)), m = 1..p, decreasing
    std::vector<double> coeffs;  // lambda_max (roots[0] - roots[m-1]) / (1 + roots[0]) >= 0
};

ChebyshevSchedule build_schedule(double dt, double lambda_max);

/// Core LIM iteration for the frozen model y' = -A_hat y + g, y(0) = y_n:
/// two Chebyshev sweeps (m = 1..p then m = 2..p), 2p-1 applications of
/// apply_fn in total.  Throws SolverError on non-finite iterates.
template <typename ApplyFn>
StateVector lim_iterate(ApplyFn&& apply_fn, const StateVector& g, const StateVector& y_n,
                        double dt, const ChebyshevSchedule& schedule) {
    StateVector y_prev = y_n;
    StateVector y_next = y_n;
    auto iterate = [&](int m) {
        const double a = schedule.coeffs[static_cast<std::size_t>(m)];
        y_next = (y_n + (dt * a) * y_prev + dt * (g - apply_fn(y_prev))) / (1.0 + dt * a);
        if (!y_next.allFinite())
            throw SolverError("lim_step: non-finite iterate (blow-up) at Chebyshev iteration " +
                              std::to_string(m + 1) + " of order " + std::to_string(schedule.order));
        y_prev = y_next;
    };
    for (int m = 0; m < schedule.order; ++m)
        iterate(m);
    for (int m = 1; m < schedule.order; ++m)
        iterate(m);
    return y_next;
}

/// One LIM time step y_n -> y_{n+1}, replacing the linearized implicit Euler
/// solve by 2p-1 Chebyshev iterations.  The spectral bound comes from the
/// system's exact product 1-norm or the cheap overestimate, per norm_mode.
StateVector lim_step(const LinearizedSystem& sys, const StateVector& y_n, double dt,
                     NormMode norm_mode = NormMode::exact_product);

}  // namespace chstep
