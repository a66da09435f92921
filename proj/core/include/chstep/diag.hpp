#pragma once

#include "chstep/grid.hpp"

#include <cstdint>
#include <vector>

namespace chstep {

/// Discrete free energy
///   E_h(y) = hx hy sum_ij F(y_ij)
///          + (eps^2/2) (sum of squared x-differences + squared y-differences),
/// with Neumann ghost reflection, so differences across the boundary vanish
/// and E_h of a constant state c is exactly hx hy N F(c).
double discrete_energy(const GridSpec& spec, double epsilon, const StateVector& y);

/// |m_n / m_0 - 1| with m = sum of grid values.  When m_0 = 0 the absolute
/// deviation |m_n - m_0| is returned instead and *absolute_flag is set.
double mass_deviation(double mass_n, double mass_0, bool* absolute_flag = nullptr);
double mass_deviation(const StateVector& y_n, const StateVector& y_0,
                      bool* absolute_flag = nullptr);

/// Euclidean relative error ||y - y_ref|| / ||y_ref||.
double relative_error(const StateVector& y, const StateVector& y_ref);

/// Sampled per-run diagnostics, aligned by index.
struct DiagnosticSeries {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> mass_deviation;
    std::vector<double> tau_history;
    std::vector<std::uint64_t> matvec_cumulative;

    std::size_t size() const { return times.size(); }
    /// Appends one sample; times must be strictly increasing.
    void append(double t, double energy_value, double mass_dev, double tau,
                std::uint64_t cumulative_matvecs);
};

}  // namespace chstep
