// Experiment runner for the Cahn-Hilliard LIM / EE2 integrators.
//
// Single run:
//   chstep --nx 64 --ny 64 --T 100 --scheme lim --adaptive --tol 1e-2 --out results/
// Sweep (entries share grid and seed with the base flags):
//   chstep --nx 64 --T 200 --sweep-file sweep.json --out sweep_results/

#include "chstep/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using chstep::ExperimentConfig;

int parse_scheme(const std::string& name, chstep::Scheme& out) {
    if (name == "lim") {
        out = chstep::Scheme::LIM;
        return 0;
    }
    if (name == "ee2") {
        out = chstep::Scheme::EE2;
        return 0;
    }
    return 1;
}

void apply_overrides(ExperimentConfig& config, const nlohmann::json& entry) {
    if (entry.contains("scheme")) {
        const auto name = entry["scheme"].get<std::string>();
        if (parse_scheme(name, config.solver.scheme) != 0)
            throw std::invalid_argument("sweep entry: unknown scheme '" + name + "'");
    }
    if (entry.contains("adaptive")) config.solver.adaptive = entry["adaptive"].get<bool>();
    if (entry.contains("eyre")) config.solver.use_eyre = entry["eyre"].get<bool>();
    if (entry.contains("tol")) config.solver.tol = entry["tol"].get<double>();
    if (entry.contains("tau0")) config.solver.tau0 = entry["tau0"].get<double>();
    if (entry.contains("mmax")) config.solver.m_max = entry["mmax"].get<int>();
    if (entry.contains("T")) config.solver.T = entry["T"].get<double>();
    if (entry.contains("sample_every")) config.sample_every = entry["sample_every"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Explicit stabilized time integration (Chebyshev LIM and exponential EE2)\n"
        "for the finite-difference 2D Cahn-Hilliard equation"};

    ExperimentConfig config;
    std::string scheme = "lim";
    std::string norm_mode = "exact";
    std::string sweep_file;
    double eps_value = 0.0;
    bool want_reference = false;

    app.add_option("--nx", config.nx, "grid cells in x")->capture_default_str();
    app.add_option("--ny", config.ny, "grid cells in y")->capture_default_str();
    app.add_option("--Lx", config.Lx, "domain width")->capture_default_str();
    app.add_option("--Ly", config.Ly, "domain height")->capture_default_str();
    app.add_option("--T", config.solver.T, "final time")->capture_default_str();
    app.add_option("--scheme", scheme, "time integrator")
        ->check(CLI::IsMember({"lim", "ee2"}))
        ->capture_default_str();
    app.add_flag("--adaptive", config.solver.adaptive, "adaptive step size selection");
    app.add_flag("--eyre", config.solver.use_eyre, "Eyre convex splitting");
    app.add_option("--tol", config.solver.tol, "accuracy tolerance")->capture_default_str();
    app.add_option("--tau0", config.solver.tau0, "initial (or constant) step size")
        ->capture_default_str();
    app.add_option("--mmax", config.solver.m_max, "maximal Krylov dimension (EE2)")
        ->capture_default_str();
    app.add_option("--seed", config.seed, "RNG seed for the initial state")
        ->capture_default_str();
    app.add_option("--eps-m", config.eps_m,
                   "interface width in cells of the 64x64 anchor grid")
        ->capture_default_str();
    app.add_option("--eps-value", eps_value, "explicit epsilon (overrides --eps-m)");
    app.add_option("--out", config.output_path, "output directory");
    app.add_option("--sweep-file", sweep_file, "JSON file with sweep entries");
    app.add_option("--sample-every", config.sample_every,
                   "record diagnostics every k-th step (0 disables)")
        ->capture_default_str();
    app.add_option("--norm-mode", norm_mode, "spectral bound: exact product or upper bound")
        ->check(CLI::IsMember({"exact", "bound"}))
        ->capture_default_str();
    app.add_flag("--reference", want_reference,
                 "compare the final state against the tight reference solver");
    app.add_option("--ref-tol", config.reference.tol, "reference solver tolerance")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    parse_scheme(scheme, config.solver.scheme);
    config.solver.lambda_norm_mode =
        norm_mode == "exact" ? chstep::NormMode::exact_product : chstep::NormMode::upper_bound;
    if (eps_value > 0.0) {
        config.eps_mode = ExperimentConfig::EpsMode::explicit_value;
        config.eps_value = eps_value;
    }
    config.compute_reference = want_reference;

    if (!sweep_file.empty()) {
        std::ifstream in(sweep_file);
        if (!in) {
            std::cerr << "config error: cannot open sweep file '" << sweep_file << "'\n";
            return 2;
        }
        nlohmann::json doc;
        std::vector<ExperimentConfig> entries;
        try {
            in >> doc;
            for (const auto& item : doc.at("runs")) {
                ExperimentConfig entry = config;
                apply_overrides(entry, item);
                entries.push_back(entry);
            }
        } catch (const std::exception& error) {
            std::cerr << "config error: " << error.what() << '\n';
            return 2;
        }
        const std::string out = config.output_path.empty() ? "sweep_out" : config.output_path;
        return chstep::sweep(config, std::move(entries), out);
    }

    return chstep::run_experiment_cli(config);
}
