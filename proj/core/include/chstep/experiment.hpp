#pragma once

#include "chstep/diag.hpp"
#include "chstep/driver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chstep {

/// Full description of one benchmark run.  Identical config + seed gives
/// bit-identical outputs on one platform (the generator is std::mt19937_64
/// with an explicit 53-bit mapping, so the stream itself is portable).
struct ExperimentConfig {
    int nx = 64;
    int ny = 64;
    double Lx = 64.0;
    double Ly = 64.0;

    enum class EpsMode { formula, explicit_value };
    EpsMode eps_mode = EpsMode::formula;
    int eps_m = 4;            // transition width in cells of the anchor grid
    int eps_base_grid = 64;   // eps is anchored here and held fixed under refinement
    double eps_value = 0.0;   // used in explicit mode

    SolverConfig solver;      // T lives here
    std::uint64_t seed = 1;
    std::string output_path;  // directory for steps.csv / summary.csv / config.json
    int sample_every = 1;     // diagnostic sampling stride; 0 disables records

    bool compute_reference = false;
    ReferenceOptions reference;

    ExperimentConfig() { solver.T = 1000.0; }

    GridSpec grid() const { return GridSpec(nx, ny, Lx, Ly); }
    double resolved_epsilon() const;
    void validate() const;  // throws std::invalid_argument
};

/// Random initial state, entries strictly inside (-0.01, 0.01), deterministic
/// for a given seed and independent of the platform.
StateVector initial_condition(const GridSpec& spec, std::uint64_t seed);

struct ExperimentResult {
    RunResult run;
    double epsilon = 0.0;
    double error_vs_reference = -1.0;  // < 0 when no reference was requested
    double wall_time_s = 0.0;
};

/// Build the problem, run the configured scheme, optionally compare against
/// the reference solver.  Throws on config errors and solver failures.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Write steps.csv (n,t,tau,matvecs,est,energy,mass_dev,m_used), summary.csv
/// and config.json under config.output_path.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result);

/// run_experiment + write_outputs with the CLI exit-code contract:
/// 0 success, 2 config error, 3 solver blow-up/failure (1 for I/O problems).
int run_experiment_cli(const ExperimentConfig& config);

/// Run every entry (same grid and seed as `base`), each into its own
/// subdirectory of out_dir, and write an aggregate sweep.csv with one line
/// per run (scheme, tau or tol, matvecs, error).  The reference solution is
/// computed once and shared.  Entries execute concurrently.
int sweep(const ExperimentConfig& base, std::vector<ExperimentConfig> entries,
          const std::string& out_dir);

/// Sampled diagnostics series for a finished run (times strictly increasing;
/// mass deviation measured against the first record).
DiagnosticSeries diagnostics_from_records(const std::vector<StepRecord>& records);

/// Serialize a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

}  // namespace chstep
