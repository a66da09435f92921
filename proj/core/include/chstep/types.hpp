#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chstep {

/// Grid values of the concentration difference at one time level.
using StateVector = Eigen::VectorXd;

/// A time step could not be completed (blow-up, Krylov stagnation, ...).
/// Carries the step index and time when thrown from a time loop.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
    SolverError(const std::string& what, long step, double t)
        : std::runtime_error(what), step_(step), time_(t) {}

    long step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    long step_ = -1;
    double time_ = 0.0;
};

/// Retryable failure of one Krylov sweep: no admissible sub-step was found.
/// The caller may shrink the requested step or raise the Krylov dimension.
class KrylovStepFailure : public SolverError {
public:
    using SolverError::SolverError;
};

/// FNV-1a over the raw bytes of a vector; tags failure diagnostics so runs
/// can be matched against logs.
std::uint64_t state_checksum(const StateVector& v);

}  // namespace chstep
