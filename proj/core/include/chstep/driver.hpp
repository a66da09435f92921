#pragma once

#include "chstep/krylov.hpp"
#include "chstep/lim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace chstep {

enum class Scheme { LIM, EE2 };

struct SolverConfig {
    Scheme scheme = Scheme::LIM;
    bool adaptive = false;
    bool use_eyre = false;
    double tau0 = 1.0;
    double T = 1.0;
    double tol = 1e-3;
    int m_max = 30;  // EE2 only
    NormMode lambda_norm_mode = NormMode::exact_product;

    /// Cap on the LIM step growth factor per step; <= 0 applies the
    /// controller formula literally (unbounded growth when est << tol).
    double lim_max_growth = 2.0;
    /// Hard upper bound on the step size; <= 0 disables.
    double tau_cap = 0.0;
    RtSearch rt_search = RtSearch::bisection;

    void validate() const;  // throws std::invalid_argument
};

struct StepRecord {
    long n = 0;
    double t = 0.0;
    double tau = 0.0;
    std::uint64_t matvecs = 0;             // A_hat applications of this step
    std::uint64_t matvecs_cumulative = 0;  // run total up to and including this step
    std::optional<double> est;             // PC error estimate (adaptive runs)
    double energy = 0.0;
    double mass = 0.0;                     // sum of grid values
    std::optional<int> m_used;             // Krylov dimension (single-sweep EE2 steps)
};

struct RunResult {
    StateVector y_final;
    std::vector<StepRecord> records;  // sampled; first entry is the initial state
    long steps = 0;
    std::uint64_t total_matvecs = 0;  // A_hat applications across all steps
    std::uint64_t pc_matvecs = 0;     // A_hat-equivalents spent in PC estimates
};

/// Predictor-corrector error estimate: the implicit-trapezoidal correction
///   y_pc = y_n - (tau/2) A (F'(y_n) + F'(y_np1) + eps^2 A (y_n + y_np1))
/// and est = ||y_np1 - y_pc|| / ||y_pc||.  Costs two applications of A.
/// When ||y_pc|| = 0 the absolute deviation is returned and the flag set.
std::pair<StateVector, double> pc_estimate(const CahnHilliardProblem& problem,
                                           const StateVector& y_n, const StateVector& y_np1,
                                           double tau, bool* zero_norm_flag = nullptr);

/// Next LIM step size (tol/est) * tau, capped at max_growth * tau when
/// max_growth > 0; est = 0 grows by the cap (or by 2 when uncapped).
double lim_tau_update(double tau, double est, double tol, double max_growth = 2.0);

/// Next EE2 step size min{ (5/4) tau, sqrt(tol/est) tau }; est = 0 grows by 5/4.
double ee2_tau_update(double tau, double est, double tol);

/// Per-step Krylov tolerance max{ min{ ||g||/(10 beta), 1/10, 10 tol }, 1e-7 };
/// beta = 0 short-circuits to 0.1 (the step is trivial).
double tol_phi_select(double g_norm, double beta, double tol);

/// Adaptive LIM loop: clamp to T, linearize, LIM step, PC estimate, advance,
/// update tau.  Records are sampled every `sample_every` steps (0 disables;
/// the initial state and the final step are always included when sampling).
RunResult run_adaptive_lim(const CahnHilliardProblem& problem, const SolverConfig& config,
                           const StateVector& y0, int sample_every = 1);

/// Adaptive EE2 loop: the Krylov method may shrink the requested step; the
/// accepted step advances time.  A failed sweep is retried with tau/2, at
/// most 5 times.
RunResult run_adaptive_ee2(const CahnHilliardProblem& problem, const SolverConfig& config,
                           const StateVector& y0, int sample_every = 1);

/// Constant-step loop for either scheme (tau clamped on the final step).
/// EE2 advances each interval with chained residual-time restarts.
RunResult run_constant(const CahnHilliardProblem& problem, const SolverConfig& config,
                       const StateVector& y0, int sample_every = 1);

/// Dispatch on config.scheme / config.adaptive.
RunResult run(const CahnHilliardProblem& problem, const SolverConfig& config,
              const StateVector& y0, int sample_every = 1);

struct ReferenceOptions {
    enum class Method { ee2_tight, rk45 };
    Method method = Method::ee2_tight;
    double tol = 1e-10;
    double tau_cap = 0.1;
    int m_max = 100;
};

/// High-accuracy trajectory used only as the error oracle: adaptive EE2 with
/// a tight tolerance and Eyre splitting disabled, or an embedded classical
/// integrator.
StateVector reference_solve(const CahnHilliardProblem& problem, const StateVector& y0,
                            double T, const ReferenceOptions& options = {});

/// Embedded Dormand-Prince 5(4) integrator for a generic autonomous system;
/// reference machinery, not a production path.
StateVector rk45_integrate(const std::function<StateVector(const StateVector&)>& f,
                           StateVector y0, double T, double tol);

}  // namespace chstep
