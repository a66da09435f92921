#include "chstep/lim.hpp"

#include <numbers>
#include <stdexcept>

namespace chstep {

int chebyshev_order(double dt, double lambda_max) {
    if (!(dt > 0.0))
        throw std::invalid_argument("chebyshev_order: dt must be positive");
    if (lambda_max < 0.0)
        throw std::invalid_argument("chebyshev_order: lambda_max must be nonnegative");
    const double pi = std::numbers::pi;
    const double x = std::sqrt(dt * lambda_max);
    const double p = (pi / 4.0) / (pi / 2.0 - std::atan(x));
    return std::max(1, static_cast<int>(std::ceil(p)));
}

ChebyshevSchedule build_schedule(double dt, double lambda_max) {
    ChebyshevSchedule schedule;
    schedule.order = chebyshev_order(dt, lambda_max);
    schedule.lambda_max = lambda_max;
    const int p = schedule.order;
    schedule.roots.resize(static_cast<std::size_t>(p));
    schedule.coeffs.resize(static_cast<std::size_t>(p));
    const double pi = std::numbers::pi;
    for (int m = 0; m < p; ++m)
        schedule.roots[static_cast<std::size_t>(m)] = std::cos(pi * (2 * m + 1) / (2.0 * p));
    const double z1 = schedule.roots[0];
    for (int m = 0; m < p; ++m)
        schedule.coeffs[static_cast<std::size_t>(m)] =
            lambda_max / (1.0 + z1) * (z1 - schedule.roots[static_cast<std::size_t>(m)]);
    return schedule;
}

StateVector lim_step(const LinearizedSystem& sys, const StateVector& y_n, double dt,
                     NormMode norm_mode) {
    if (!(dt > 0.0))
        throw std::invalid_argument("lim_step: dt must be positive");
    const ChebyshevSchedule schedule = build_schedule(dt, sys.one_norm(norm_mode));
    return lim_iterate([&sys](const StateVector& v) { return sys.apply(v); }, sys.forcing(),
                       y_n, dt, schedule);
}

}  // namespace chstep
