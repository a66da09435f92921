#include "chstep/experiment.hpp"

#include "chstep/problem.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace chstep {

namespace fs = std::filesystem;
using nlohmann::json;

double ExperimentConfig::resolved_epsilon() const {
    if (eps_mode == EpsMode::explicit_value)
        return eps_value;
    const double h_base = Lx / eps_base_grid;
    return epsilon_m(h_base, eps_m);
}

void ExperimentConfig::validate() const {
    if (nx < 2 || ny < 2)
        throw std::invalid_argument("ExperimentConfig: nx and ny must be at least 2");
    if (!(Lx > 0.0) || !(Ly > 0.0))
        throw std::invalid_argument("ExperimentConfig: Lx and Ly must be positive");
    if (eps_mode == EpsMode::formula) {
        if (eps_m < 1)
            throw std::invalid_argument("ExperimentConfig: eps_m must be a positive integer");
        if (eps_base_grid < 1)
            throw std::invalid_argument("ExperimentConfig: eps_base_grid must be positive");
    } else if (!(eps_value > 0.0)) {
        throw std::invalid_argument("ExperimentConfig: eps_value must be positive");
    }
    if (sample_every < 0)
        throw std::invalid_argument("ExperimentConfig: sample_every must be nonnegative");
    solver.validate();
}

StateVector initial_condition(const GridSpec& spec, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    StateVector y(spec.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double value;
        do {
            // top 53 bits, offset to the cell center: u in (0,1) strictly
            const double u = (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
            value = 0.02 * u - 0.01;
        } while (value <= -0.01 || value >= 0.01);
        y[i] = value;
    }
    return y;
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    result.epsilon = config.resolved_epsilon();

    const GridSpec spec = config.grid();
    CahnHilliardProblem problem(build_laplacian(spec), result.epsilon, config.solver.use_eyre);
    const StateVector y0 = initial_condition(spec, config.seed);

    const auto start = std::chrono::steady_clock::now();
    result.run = run(problem, config.solver, y0, config.sample_every);
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (config.compute_reference) {
        const StateVector y_ref =
            reference_solve(problem, y0, config.solver.T, config.reference);
        result.error_vs_reference = relative_error(result.run.y_final, y_ref);
    }
    return result;
}

namespace {

const char* scheme_name(Scheme scheme) { return scheme == Scheme::LIM ? "lim" : "ee2"; }

json config_to_json(const ExperimentConfig& config) {
    json j;
    j["nx"] = config.nx;
    j["ny"] = config.ny;
    j["Lx"] = config.Lx;
    j["Ly"] = config.Ly;
    j["eps_mode"] =
        config.eps_mode == ExperimentConfig::EpsMode::formula ? "formula" : "explicit";
    j["eps_m"] = config.eps_m;
    j["eps_base_grid"] = config.eps_base_grid;
    j["eps_value"] = config.eps_value;
    j["epsilon_resolved"] = config.resolved_epsilon();
    j["scheme"] = scheme_name(config.solver.scheme);
    j["adaptive"] = config.solver.adaptive;
    j["eyre"] = config.solver.use_eyre;
    j["T"] = config.solver.T;
    j["tol"] = config.solver.tol;
    j["tau0"] = config.solver.tau0;
    j["m_max"] = config.solver.m_max;
    j["norm_mode"] =
        config.solver.lambda_norm_mode == NormMode::exact_product ? "exact" : "bound";
    j["lim_max_growth"] = config.solver.lim_max_growth;
    j["tau_cap"] = config.solver.tau_cap;
    j["rt_search"] = config.solver.rt_search == RtSearch::bisection ? "bisection" : "scan";
    j["seed"] = config.seed;
    j["sample_every"] = config.sample_every;
    j["compute_reference"] = config.compute_reference;
    j["reference_tol"] = config.reference.tol;
    j["output_path"] = config.output_path;
    return j;
}

void write_steps_csv(const fs::path& path, const std::vector<StepRecord>& records) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string());
    out << "n,t,tau,matvecs,est,energy,mass_dev,m_used\n";
    const double mass0 = records.empty() ? 0.0 : records.front().mass;
    for (const StepRecord& r : records) {
        out << r.n << ',' << format_double(r.t) << ',' << format_double(r.tau) << ','
            << r.matvecs << ',';
        if (r.est)
            out << format_double(*r.est);
        out << ',' << format_double(r.energy) << ','
            << format_double(mass_deviation(r.mass, mass0)) << ',';
        if (r.m_used)
            out << *r.m_used;
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

void write_summary_csv(const fs::path& path, const ExperimentConfig& config,
                       const ExperimentResult& result) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string());
    out << "scheme,adaptive,eyre,nx,ny,T,tol,tau0,m_max,seed,epsilon,steps,"
           "total_matvecs,pc_matvecs,final_energy,final_mass_dev,error,wall_time_s\n";
    const auto& records = result.run.records;
    const double mass0 = records.empty() ? 0.0 : records.front().mass;
    const double final_energy = records.empty() ? 0.0 : records.back().energy;
    const double final_mass_dev =
        records.empty() ? 0.0 : mass_deviation(records.back().mass, mass0);
    out << scheme_name(config.solver.scheme) << ',' << (config.solver.adaptive ? 1 : 0) << ','
        << (config.solver.use_eyre ? 1 : 0) << ',' << config.nx << ',' << config.ny << ','
        << format_double(config.solver.T) << ',' << format_double(config.solver.tol) << ','
        << format_double(config.solver.tau0) << ',' << config.solver.m_max << ','
        << config.seed << ',' << format_double(result.epsilon) << ',' << result.run.steps
        << ',' << result.run.total_matvecs << ',' << result.run.pc_matvecs << ','
        << format_double(final_energy) << ',' << format_double(final_mass_dev) << ',';
    if (result.error_vs_reference >= 0.0)
        out << format_double(result.error_vs_reference);
    out << ',' << format_double(result.wall_time_s) << '\n';
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
    if (config.output_path.empty())
        return;
    const fs::path dir(config.output_path);
    fs::create_directories(dir);
    write_steps_csv(dir / "steps.csv", result.run.records);
    write_summary_csv(dir / "summary.csv", config, result);
    std::ofstream cfg(dir / "config.json");
    if (!cfg)
        throw std::runtime_error("cannot open " + (dir / "config.json").string());
    cfg << config_to_json(config).dump(2) << '\n';
}

int run_experiment_cli(const ExperimentConfig& config) {
    try {
        config.validate();
    } catch (const std::invalid_argument& error) {
        std::cerr << "config error: " << error.what() << '\n';
        return 2;
    }
    try {
        std::cout << config_to_json(config).dump(2) << '\n';
        const ExperimentResult result = run_experiment(config);
        write_outputs(config, result);
        std::cout << "steps: " << result.run.steps
                  << "  matvecs: " << result.run.total_matvecs
                  << "  wall: " << result.wall_time_s << " s";
        if (result.error_vs_reference >= 0.0)
            std::cout << "  error: " << result.error_vs_reference;
        std::cout << '\n';
        return 0;
    } catch (const SolverError& error) {
        std::cerr << "solver failure: " << error.what() << '\n';
        return 3;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
}

int sweep(const ExperimentConfig& base, std::vector<ExperimentConfig> entries,
          const std::string& out_dir) {
    try {
        base.validate();
        for (auto& entry : entries) {
            // the sweep shares one grid, domain and seed
            entry.nx = base.nx;
            entry.ny = base.ny;
            entry.Lx = base.Lx;
            entry.Ly = base.Ly;
            entry.eps_mode = base.eps_mode;
            entry.eps_m = base.eps_m;
            entry.eps_base_grid = base.eps_base_grid;
            entry.eps_value = base.eps_value;
            entry.seed = base.seed;
            entry.compute_reference = false;  // shared reference below
            entry.validate();
        }
    } catch (const std::invalid_argument& error) {
        std::cerr << "config error: " << error.what() << '\n';
        return 2;
    }

    try {
        const fs::path dir(out_dir);
        fs::create_directories(dir);

        const GridSpec spec = base.grid();
        const double epsilon = base.resolved_epsilon();
        const StateVector y0 = initial_condition(spec, base.seed);
        CahnHilliardProblem problem(build_laplacian(spec), epsilon, false);
        const StateVector y_ref =
            reference_solve(problem, y0, base.solver.T, base.reference);

        struct Row {
            ExperimentConfig config;
            ExperimentResult result;
        };
        std::vector<std::future<Row>> futures;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            ExperimentConfig entry = entries[i];
            std::ostringstream name;
            name << "run_" << scheme_name(entry.solver.scheme) << '_'
                 << (entry.solver.adaptive ? "adaptive" : "constant") << '_' << i;
            entry.output_path = (dir / name.str()).string();
            futures.push_back(std::async(std::launch::async, [entry, &y_ref] {
                Row row{entry, run_experiment(entry)};
                row.result.error_vs_reference =
                    relative_error(row.result.run.y_final, y_ref);
                write_outputs(entry, row.result);
                return row;
            }));
        }

        std::ofstream aggregate(dir / "sweep.csv");
        if (!aggregate)
            throw std::runtime_error("cannot open " + (dir / "sweep.csv").string());
        aggregate << "scheme,adaptive,eyre,param,matvecs,error\n";
        for (auto& future : futures) {
            const Row row = future.get();
            const double param =
                row.config.solver.adaptive ? row.config.solver.tol : row.config.solver.tau0;
            aggregate << scheme_name(row.config.solver.scheme) << ','
                      << (row.config.solver.adaptive ? 1 : 0) << ','
                      << (row.config.solver.use_eyre ? 1 : 0) << ','
                      << format_double(param) << ',' << row.result.run.total_matvecs << ','
                      << format_double(row.result.error_vs_reference) << '\n';
        }
        return 0;
    } catch (const SolverError& error) {
        std::cerr << "solver failure: " << error.what() << '\n';
        return 3;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
}

DiagnosticSeries diagnostics_from_records(const std::vector<StepRecord>& records) {
    DiagnosticSeries series;
    if (records.empty())
        return series;
    const double mass0 = records.front().mass;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const StepRecord& r = records[i];
        if (i > 0 && !(r.t > series.times.back()))
            continue;  // repeated sampling times collapse to the first entry
        series.append(r.t, r.energy, mass_deviation(r.mass, mass0), r.tau,
                      r.matvecs_cumulative);
    }
    return series;
}

}  // namespace chstep
