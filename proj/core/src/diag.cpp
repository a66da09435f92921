#include "chstep/diag.hpp"

#include "chstep/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace chstep {

double discrete_energy(const GridSpec& spec, double epsilon, const StateVector& y) {
    if (!spec.valid())
        throw std::invalid_argument("discrete_energy: invalid grid spec");
    if (y.size() != spec.size())
        throw std::invalid_argument("discrete_energy: dimension mismatch");

    double well = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k)
        well += free_energy(y[k]);

    double gradient = 0.0;
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i + 1 < spec.nx; ++i) {
            const double d = y[spec.index(i + 1, j)] - y[spec.index(i, j)];
            gradient += d * d;
        }
    for (int j = 0; j + 1 < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) {
            const double d = y[spec.index(i, j + 1)] - y[spec.index(i, j)];
            gradient += d * d;
        }

    return spec.hx() * spec.hy() * well + 0.5 * epsilon * epsilon * gradient;
}

double mass_deviation(double mass_n, double mass_0, bool* absolute_flag) {
    if (absolute_flag)
        *absolute_flag = false;
    if (mass_0 == 0.0) {
        if (absolute_flag)
            *absolute_flag = true;
        return std::abs(mass_n - mass_0);
    }
    return std::abs(mass_n / mass_0 - 1.0);
}

double mass_deviation(const StateVector& y_n, const StateVector& y_0, bool* absolute_flag) {
    return mass_deviation(y_n.sum(), y_0.sum(), absolute_flag);
}

double relative_error(const StateVector& y, const StateVector& y_ref) {
    const double denom = y_ref.norm();
    if (denom == 0.0)
        throw std::invalid_argument("relative_error: reference norm is zero");
    return (y - y_ref).norm() / denom;
}

void DiagnosticSeries::append(double t, double energy_value, double mass_dev, double tau,
                              std::uint64_t cumulative_matvecs) {
    if (!times.empty() && !(t > times.back()))
        throw std::invalid_argument("DiagnosticSeries: times must be strictly increasing");
    times.push_back(t);
    energy.push_back(energy_value);
    mass_deviation.push_back(mass_dev);
    tau_history.push_back(tau);
    matvec_cumulative.push_back(cumulative_matvecs);
}

}  // namespace chstep
