#include "chstep/driver.hpp"

#include "chstep/diag.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chstep {

void SolverConfig::validate() const {
    if (!(tau0 > 0.0))
        throw std::invalid_argument("SolverConfig: tau0 must be positive");
    if (!(T > 0.0))
        throw std::invalid_argument("SolverConfig: T must be positive");
    if (!(tol > 0.0))
        throw std::invalid_argument("SolverConfig: tol must be positive");
    if (m_max < 1)
        throw std::invalid_argument("SolverConfig: m_max must be at least 1");
}

std::pair<StateVector, double> pc_estimate(const CahnHilliardProblem& problem,
                                           const StateVector& y_n, const StateVector& y_np1,
                                           double tau, bool* zero_norm_flag) {
    const double eps2 = problem.epsilon * problem.epsilon;
    StateVector mu = y_n.unaryExpr([](double c) { return free_energy_prime(c); }) +
                     y_np1.unaryExpr([](double c) { return free_energy_prime(c); }) +
                     eps2 * problem.A.apply(y_n + y_np1);
    StateVector y_pc = y_n - (0.5 * tau) * problem.A.apply(mu);
    const double denom = y_pc.norm();
    const double diff = (y_np1 - y_pc).norm();
    if (zero_norm_flag)
        *zero_norm_flag = (denom == 0.0);
    const double est = denom == 0.0 ? diff : diff / denom;
    return {std::move(y_pc), est};
}

double lim_tau_update(double tau, double est, double tol, double max_growth) {
    const double growth = max_growth > 0.0 ? max_growth : 2.0;
    if (est <= 0.0)
        return growth * tau;
    double tau_new = (tol / est) * tau;
    if (max_growth > 0.0)
        tau_new = std::min(tau_new, max_growth * tau);
    return tau_new;
}

double ee2_tau_update(double tau, double est, double tol) {
    if (est <= 0.0)
        return 1.25 * tau;
    return std::min(1.25 * tau, std::sqrt(tol / est) * tau);
}

double tol_phi_select(double g_norm, double beta, double tol) {
    if (beta < 0.0)
        throw std::invalid_argument("tol_phi_select: beta must be nonnegative");
    if (beta == 0.0)
        return 0.1;
    const double candidate = std::min({g_norm / (10.0 * beta), 0.1, 10.0 * tol});
    return std::max(candidate, 1e-7);
}

namespace {

// samples step records for a run; the initial state and the final step are
// always included when sampling is on
class RecordSink {
public:
    RecordSink(const CahnHilliardProblem& problem, int sample_every, RunResult& out)
        : problem_(problem), sample_every_(sample_every), out_(out),
          grid_ok_(problem.A.spec().valid()) {}

    void initial(const StateVector& y0) {
        if (sample_every_ <= 0)
            return;
        out_.records.push_back(make_record(0, 0.0, 0.0, 0, std::nullopt, std::nullopt, y0));
    }

    void step(long n, double t, double tau, std::uint64_t matvecs, std::optional<double> est,
              std::optional<int> m_used, const StateVector& y, bool is_final) {
        cumulative_ += matvecs;
        if (sample_every_ <= 0)
            return;
        if (n % sample_every_ != 0 && !is_final)
            return;
        StepRecord record = make_record(n, t, tau, matvecs, est, m_used, y);
        record.matvecs_cumulative = cumulative_;
        out_.records.push_back(record);
    }

private:
    StepRecord make_record(long n, double t, double tau, std::uint64_t matvecs,
                           std::optional<double> est, std::optional<int> m_used,
                           const StateVector& y) const {
        StepRecord record;
        record.n = n;
        record.t = t;
        record.tau = tau;
        record.matvecs = matvecs;
        record.est = est;
        record.energy = grid_ok_ ? discrete_energy(problem_.A.spec(), problem_.epsilon, y) : 0.0;
        record.mass = y.sum();
        record.m_used = m_used;
        return record;
    }

    const CahnHilliardProblem& problem_;
    int sample_every_;
    RunResult& out_;
    bool grid_ok_;
    std::uint64_t cumulative_ = 0;
};

[[noreturn]] void rethrow_with_context(const SolverError& error, long step, double t,
                                       const StateVector& y) {
    throw SolverError(std::string(error.what()) + " [step " + std::to_string(step) +
                          ", t = " + std::to_string(t) +
                          ", state checksum " + std::to_string(state_checksum(y)) + "]",
                      step, t);
}

}  // namespace

RunResult run_adaptive_lim(const CahnHilliardProblem& problem, const SolverConfig& config,
                           const StateVector& y0, int sample_every) {
    config.validate();
    RunResult result;
    RecordSink sink(problem, sample_every, result);
    sink.initial(y0);

    StateVector y = y0;
    double t = 0.0;
    double tau = config.tau0;
    long n = 0;
    while (t < config.T) {
        const bool clamped = (t + tau > config.T);
        if (clamped)
            tau = config.T - t;
        const LinearizedSystem sys = linearize(problem, y);
        StateVector y_next;
        try {
            y_next = lim_step(sys, y, tau, config.lambda_norm_mode);
        } catch (const SolverError& error) {
            rethrow_with_context(error, n + 1, t, y);
        }
        const auto [y_pc, est] = pc_estimate(problem, y, y_next, tau);
        ++result.pc_matvecs;
        y = std::move(y_next);
        t = clamped ? config.T : t + tau;
        ++n;
        const std::uint64_t matvecs = sys.matvec_count();
        result.total_matvecs += matvecs;
        sink.step(n, t, tau, matvecs, est, std::nullopt, y, t == config.T);
        tau = lim_tau_update(tau, est, config.tol, config.lim_max_growth);
        if (config.tau_cap > 0.0)
            tau = std::min(tau, config.tau_cap);
    }
    result.y_final = std::move(y);
    result.steps = n;
    return result;
}

RunResult run_adaptive_ee2(const CahnHilliardProblem& problem, const SolverConfig& config,
                           const StateVector& y0, int sample_every) {
    config.validate();
    RunResult result;
    RecordSink sink(problem, sample_every, result);
    sink.initial(y0);

    StateVector y = y0;
    double t = 0.0;
    double tau = config.tau0;
    long n = 0;
    while (t < config.T) {
        bool clamped = (t + tau > config.T);
        if (clamped)
            tau = config.T - t;
        const LinearizedSystem sys = linearize(problem, y);
        const StateVector r0 = sys.residual0(y);
        const double beta = r0.norm();
        const double tol_phi = tol_phi_select(sys.forcing().norm(), beta, config.tol);

        PhiStepResult step;
        double tau_request = tau;
        int attempts = 0;
        for (;;) {
            try {
                step = ee2_krylov_step(sys, y, tau_request, tol_phi, config.m_max, &r0,
                                       config.rt_search);
                break;
            } catch (const KrylovStepFailure& failure) {
                if (++attempts > 5)
                    rethrow_with_context(failure, n + 1, t, y);
                tau_request *= 0.5;
                clamped = false;
            }
        }

        const auto [y_pc, est] = pc_estimate(problem, y, step.y_next, step.tau_accepted);
        ++result.pc_matvecs;
        y = std::move(step.y_next);
        t = (clamped && step.converged_early) ? config.T : t + step.tau_accepted;
        ++n;
        const std::uint64_t matvecs = sys.matvec_count();
        result.total_matvecs += matvecs;
        sink.step(n, t, step.tau_accepted, matvecs, est, step.m_used, y, t == config.T);
        tau = ee2_tau_update(step.tau_accepted, est, config.tol);
        if (config.tau_cap > 0.0)
            tau = std::min(tau, config.tau_cap);
    }
    result.y_final = std::move(y);
    result.steps = n;
    return result;
}

RunResult run_constant(const CahnHilliardProblem& problem, const SolverConfig& config,
                       const StateVector& y0, int sample_every) {
    config.validate();
    RunResult result;
    RecordSink sink(problem, sample_every, result);
    sink.initial(y0);

    StateVector y = y0;
    double t = 0.0;
    long n = 0;
    while (t < config.T) {
        const bool clamped = (t + config.tau0 > config.T);
        const double tau = clamped ? config.T - t : config.tau0;
        const LinearizedSystem sys = linearize(problem, y);
        std::optional<int> m_used;
        try {
            if (config.scheme == Scheme::LIM) {
                y = lim_step(sys, y, tau, config.lambda_norm_mode);
            } else {
                const StateVector r0 = sys.residual0(y);
                const double tol_phi =
                    tol_phi_select(sys.forcing().norm(), r0.norm(), config.tol);
                ConstantStepResult step = ee2_constant_step(sys, y, tau, tol_phi,
                                                            config.m_max, &r0,
                                                            config.rt_search);
                if (step.sweeps == 1)
                    m_used = static_cast<int>(sys.matvec_count()) - 1;
                y = std::move(step.y_next);
            }
        } catch (const SolverError& error) {
            rethrow_with_context(error, n + 1, t, y);
        }
        t = clamped ? config.T : t + tau;
        ++n;
        const std::uint64_t matvecs = sys.matvec_count();
        result.total_matvecs += matvecs;
        sink.step(n, t, tau, matvecs, std::nullopt, m_used, y, t == config.T);
    }
    result.y_final = std::move(y);
    result.steps = n;
    return result;
}

RunResult run(const CahnHilliardProblem& problem, const SolverConfig& config,
              const StateVector& y0, int sample_every) {
    if (!config.adaptive)
        return run_constant(problem, config, y0, sample_every);
    return config.scheme == Scheme::LIM ? run_adaptive_lim(problem, config, y0, sample_every)
                                        : run_adaptive_ee2(problem, config, y0, sample_every);
}

StateVector reference_solve(const CahnHilliardProblem& problem, const StateVector& y0,
                            double T, const ReferenceOptions& options) {
    if (options.method == ReferenceOptions::Method::rk45)
        return rk45_integrate([&problem](const StateVector& y) { return problem.rhs(y); },
                              y0, T, options.tol);

    CahnHilliardProblem plain(problem.A, problem.epsilon, /*eyre=*/false);
    SolverConfig config;
    config.scheme = Scheme::EE2;
    config.adaptive = true;
    config.use_eyre = false;
    config.tau0 = options.tau_cap > 0.0 ? options.tau_cap : 0.1;
    config.T = T;
    config.tol = options.tol;
    config.m_max = options.m_max;
    config.tau_cap = options.tau_cap;
    return run_adaptive_ee2(plain, config, y0, /*sample_every=*/0).y_final;
}

StateVector rk45_integrate(const std::function<StateVector(const StateVector&)>& f,
                           StateVector y0, double T, double tol) {
    if (!(T > 0.0))
        throw std::invalid_argument("rk45_integrate: T must be positive");
    if (!(tol > 0.0))
        throw std::invalid_argument("rk45_integrate: tol must be positive");

    // Dormand-Prince 5(4) coefficients
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double d1 = 71.0 / 57600, d3 = -71.0 / 16695, d4 = 71.0 / 1920,
                     d5 = -17253.0 / 339200, d6 = 22.0 / 525, d7 = -1.0 / 40;

    StateVector y = std::move(y0);
    StateVector k1 = f(y);
    double t = 0.0;
    double dt = std::min(T, 1e-3);
    const long max_steps = 200'000'000L;
    for (long step = 0; t < T; ++step) {
        if (step >= max_steps)
            throw SolverError("rk45_integrate: step budget exhausted", step, t);
        const bool clamped = (t + dt > T);
        if (clamped)
            dt = T - t;

        const StateVector k2 = f(y + dt * (a21 * k1));
        const StateVector k3 = f(y + dt * (a31 * k1 + a32 * k2));
        const StateVector k4 = f(y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const StateVector k5 = f(y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const StateVector k6 = f(y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const StateVector y_new = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const StateVector k7 = f(y_new);
        const StateVector diff = dt * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

        double err_sq = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            const double e = diff[i] / sc;
            err_sq += e * e;
        }
        const double err = std::sqrt(err_sq / static_cast<double>(y.size()));
        if (err <= 1.0 || dt <= 1e-14 * T) {
            t = clamped ? T : t + dt;
            y = y_new;
            k1 = k7;  // first-same-as-last
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        dt *= std::clamp(factor, 0.2, 5.0);
        if (!y.allFinite())
            throw SolverError("rk45_integrate: non-finite state", step, t);
    }
    return y;
}

}  // namespace chstep
