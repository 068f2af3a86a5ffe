// Command-line front end for the layered-sphere diffusion toolkit.
//
// Subcommands:
//   validate  check a scenario file; prints one diagnostic per line
//   run       execute analytic and/or particle engine, write CSV artifacts
//   sweep     re-run the scenario across a layer-porosity sweep
//
// Exit codes: 0 success, 1 engine failure, 2 input error.
// The SPHERECIR_THREADS environment variable sets the default worker count.

#include <CLI11.hpp>

#include <spherecir/harness.hpp>
#include <spherecir/scenario_io.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spherecir;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEngine = 1;
constexpr int kExitInput = 2;

struct Overrides {
    std::int64_t seed = -1;
    double dt = 0.0;
    std::int64_t particles = 0;
    double window = 0.0;
    int num_samples = 0;
};

void apply_overrides(Scenario& sc, const Overrides& ov) {
    if (ov.seed >= 0) sc.pbs.seed = static_cast<std::uint64_t>(ov.seed);
    if (ov.dt > 0.0) sc.pbs.dt_s = ov.dt;
    if (ov.particles > 0) {
        sc.pbs.num_molecules = ov.particles;
        sc.source.molecule_count = ov.particles;
    }
    if (ov.window > 0.0) {
        sc.grid.window_s = ov.window;
        sc.pbs.duration_s = ov.window;
    }
    if (ov.num_samples > 0) sc.grid.num_samples = ov.num_samples;
}

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "Override the particle-simulator RNG seed");
    cmd->add_option("--dt", ov.dt, "Override the particle time step [s]");
    cmd->add_option("--particles", ov.particles, "Override the ensemble size");
    cmd->add_option("--window", ov.window,
                    "Override the time window / simulation horizon [s]");
    cmd->add_option("--num-samples", ov.num_samples,
                    "Override the number of analytic time samples (even)");
}

std::string gnuplot_stub(const std::string& comparison_csv_name) {
    return "# gnuplot script stub; run from the artifact directory\n"
           "set datafile separator ','\n"
           "set key autotitle columnheader\n"
           "set xlabel 't [s]'\n"
           "set ylabel 'concentration [1/um^3]'\n"
           "plot '" + comparison_csv_name +
           "' using 4:(strcol(2) eq 'analytic' ? $5 : 1/0) with lines title 'analytic', \\\n"
           "     '' using 4:(strcol(2) eq 'pbs' ? $5 : 1/0) with points pt 7 ps 0.3 title 'pbs'\n";
}

// Writes one complete artifact set for a scenario into `dir`.
int write_run_artifacts(const Scenario& sc, const std::string& engine,
                        const fs::path& dir, unsigned threads) {
    fs::create_directories(dir);
    nlohmann::json manifest = run_manifest(sc, engine);

    if (engine == "analytic") {
        std::vector<TemporalCIR> cirs = analytic_receiver_cirs(sc, threads);
        for (std::size_t rcv = 0; rcv < cirs.size(); ++rcv)
            write_text_file((dir / ("cir_receiver_" + std::to_string(rcv) + ".csv")).string(),
                            cir_csv(cirs[rcv]));
    } else if (engine == "pbs") {
        PbsSeries series =
            run_scenario(sc.stack(), sc.source, sc.receivers, sc.pbs, threads);
        for (std::size_t rcv = 0; rcv < sc.receivers.size(); ++rcv)
            write_text_file((dir / ("pbs_receiver_" + std::to_string(rcv) + ".csv")).string(),
                            pbs_receiver_csv(series, rcv));
        write_text_file((dir / "pbs_summary.csv").string(), pbs_summary_csv(series));
    } else {  // both
        ComparisonReport report = run_comparison(sc, threads);
        for (std::size_t rcv = 0; rcv < report.receivers.size(); ++rcv) {
            write_text_file((dir / ("cir_receiver_" + std::to_string(rcv) + ".csv")).string(),
                            cir_csv(report.receivers[rcv].analytic));
            write_text_file((dir / ("pbs_receiver_" + std::to_string(rcv) + ".csv")).string(),
                            pbs_receiver_csv(report.pbs, rcv));
        }
        write_text_file((dir / "pbs_summary.csv").string(), pbs_summary_csv(report.pbs));
        write_text_file((dir / "comparison.csv").string(),
                        comparison_csv(sc.name, report));
        write_text_file((dir / "metrics.csv").string(), metrics_csv(report));
        write_text_file((dir / "plot.gp").string(), gnuplot_stub("comparison.csv"));
        nlohmann::json metrics = nlohmann::json::array();
        for (const ReceiverComparison& rc : report.receivers)
            metrics.push_back({{"nrmse", rc.nrmse},
                               {"peak_value_rel_err", rc.peak_value_rel_err},
                               {"peak_time_rel_err", rc.peak_time_rel_err},
                               {"counting_noise_rel", rc.counting_noise_rel}});
        manifest["metrics"] = metrics;
    }
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
    Diagnostics diag = validate_scenario_file(scenario_path);
    if (diag.empty()) {
        std::cout << "valid: " << scenario_path << "\n";
        return kExitOk;
    }
    for (const std::string& d : diag) std::cerr << d << "\n";
    return kExitInput;
}

int cmd_run(const std::string& scenario_path, const std::string& engine,
            const std::string& out_dir, const Overrides& ov, unsigned threads) {
    Scenario sc;
    try {
        sc = load_scenario(scenario_path);
        apply_overrides(sc, ov);
        sc.validate();
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    }
    try {
        return write_run_artifacts(sc, engine, out_dir, threads);
    } catch (const std::exception& e) {
        std::cerr << "engine failure (" << engine << "): " << e.what() << "\n";
        return kExitEngine;
    }
}

int cmd_sweep(const std::string& scenario_path, const std::string& engine,
              const std::string& out_dir, const Overrides& ov,
              int layer_override, std::vector<double> porosities, unsigned threads) {
    Scenario sc;
    try {
        sc = load_scenario(scenario_path);
        apply_overrides(sc, ov);
        if (layer_override >= 0) sc.sweep_layer = layer_override;
        if (!porosities.empty()) sc.sweep_porosities = porosities;
        if (sc.sweep_layer < 0 || sc.sweep_porosities.empty()) {
            std::cerr << "sweep: scenario has no sweep section; pass --layer and "
                         "--porosities\n";
            return kExitInput;
        }
        sc.validate();
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    }

    try {
        fs::path root(out_dir);
        fs::create_directories(root);
        // ordering report: external receiver peak + retained inside mass per point
        std::string report = "porosity,receiver,peak_value,peak_time_s,fwhm_s\n";
        std::string retention =
            "porosity,t_probe_s,analytic_inside_mass,pbs_inside_fraction\n";
        bool with_pbs = (engine != "analytic");
        auto points = porosity_sweep(sc, sc.sweep_layer, sc.sweep_porosities,
                                     with_pbs, threads);
        double t_probe = 0.5 * sc.grid.window_s;
        for (std::size_t p = 0; p < points.size(); ++p) {
            const SweepPoint& pt = points[p];
            char label[32];
            std::snprintf(label, sizeof(label), "eps_%0.4f", pt.porosity);
            fs::path dir = root / label;
            fs::create_directories(dir);

            Scenario point_sc = sc;
            point_sc.layers[static_cast<std::size_t>(sc.sweep_layer)].porosity =
                pt.porosity;
            nlohmann::json manifest = run_manifest(point_sc, engine);

            for (std::size_t rcv = 0; rcv < pt.analytic.size(); ++rcv) {
                write_text_file(
                    (dir / ("cir_receiver_" + std::to_string(rcv) + ".csv")).string(),
                    cir_csv(pt.analytic[rcv]));
                const PeakMetrics& pk = pt.peaks[rcv];
                char row[160];
                std::snprintf(row, sizeof(row), "%.17g,%zu,%.17g,%.17g,%.17g\n",
                              pt.porosity, rcv, pk.peak_value, pk.peak_time, pk.fwhm);
                report += row;
            }
            write_text_file((dir / "inside_mass.csv").string(),
                            cir_csv(pt.analytic_inside_mass));
            double analytic_mass = interpolate_series(
                pt.analytic_inside_mass.time_s, pt.analytic_inside_mass.concentration,
                t_probe);
            double pbs_fraction = -1.0;
            if (pt.has_pbs) {
                for (std::size_t rcv = 0; rcv < sc.receivers.size(); ++rcv)
                    write_text_file(
                        (dir / ("pbs_receiver_" + std::to_string(rcv) + ".csv")).string(),
                        pbs_receiver_csv(pt.pbs, rcv));
                write_text_file((dir / "pbs_summary.csv").string(),
                                pbs_summary_csv(pt.pbs));
                std::vector<double> inside(pt.pbs.inside_count.begin(),
                                           pt.pbs.inside_count.end());
                pbs_fraction =
                    interpolate_series(pt.pbs.time_s, inside, t_probe) /
                    static_cast<double>(sc.pbs.num_molecules);
            }
            char row[128];
            std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g\n", pt.porosity,
                          t_probe, analytic_mass, pbs_fraction);
            retention += row;
            write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
        }
        write_text_file((root / "sweep_peaks.csv").string(), report);
        write_text_file((root / "sweep_retention.csv").string(), retention);
        nlohmann::json manifest = run_manifest(sc, engine);
        manifest["sweep_layer"] = sc.sweep_layer;
        manifest["sweep_porosities"] = sc.sweep_porosities;
        write_text_file((root / "manifest.json").string(), manifest.dump(2) + "\n");
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "engine failure (" << engine << "): " << e.what() << "\n";
        return kExitEngine;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Diffusion channel impulse response of a layered porous sphere:\n"
        "semi-analytical solver and particle-based simulator"};
    app.require_subcommand(1);
    app.fallthrough(true);
    app.failure_message(CLI::FailureMessage::help);

    unsigned threads = 0;
    app.add_option("--threads", threads,
                   "Worker threads (0 = SPHERECIR_THREADS or hardware default)");

    std::string scenario_path;
    std::string engine = "both";
    std::string out_dir = "artifacts";
    Overrides ov;
    int sweep_layer = -1;
    std::vector<double> sweep_porosities;

    CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

    CLI::App* run = app.add_subcommand("run", "Run the engines and write artifacts");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--engine", engine, "analytic | pbs | both")
        ->check(CLI::IsMember({"analytic", "pbs", "both"}));
    run->add_option("-o,--output", out_dir, "Artifact output directory");
    add_override_flags(run, ov);

    CLI::App* sweep = app.add_subcommand("sweep", "Porosity sweep of one layer");
    sweep->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    sweep->add_option("--engine", engine, "analytic | pbs | both")
        ->check(CLI::IsMember({"analytic", "pbs", "both"}));
    sweep->add_option("-o,--output", out_dir, "Artifact output directory");
    sweep->add_option("--layer", sweep_layer, "0-based index of the swept layer");
    sweep->add_option("--porosities", sweep_porosities,
                      "Porosity values for the swept layer")
        ->delimiter(',');
    add_override_flags(sweep, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    if (validate->parsed()) return cmd_validate(scenario_path);
    if (run->parsed()) return cmd_run(scenario_path, engine, out_dir, ov, threads);
    return cmd_sweep(scenario_path, engine, out_dir, ov, sweep_layer,
                     sweep_porosities, threads);
}
