#ifndef SPHERECIR_SCENARIO_IO_HPP
#define SPHERECIR_SCENARIO_IO_HPP

/**
 * @file scenario_io.hpp
 * @brief Versioned JSON scenario files and CSV/metadata artifact writers.
 *
 * Schema version 1 (all lengths um, times s, diffusion um^2/s):
 *
 * {
 *   "schema_version": 1,
 *   "name": "desk-internal",
 *   "medium": {
 *     "free_diffusion_um2_per_s": 0.1,
 *     "layers": [ {"width_um": ..., "porosity": ..., "degradation_per_s": ...}, ... ],
 *     "exterior": {"porosity": 1.0, "degradation_per_s": 0.0}
 *   },
 *   "source":    {"r_um", "theta_rad", "phi_rad", "emission_time_s", "molecules"},
 *   "receivers": [ {"r_um", "theta_rad", "phi_rad"}, ... ],
 *   "analytic":  {"window_s", "num_samples", "damping"},
 *   "pbs":       {"dt_s", "num_molecules", "seed", "receiver_radius_um", "duration_s"},
 *   "sweep":     {"layer": 2, "porosities": [0.1697, 0.10, 0.05]}   // optional
 * }
 *
 * Validation reports every violation with its field path (e.g.
 * "medium.layers[1].porosity: must be in (0, 1]") rather than stopping at
 * the first.
 *
 * All floating-point output is printed with %.17g so that re-running a
 * fixed-seed scenario reproduces artifacts byte for byte.
 */

#include <spherecir/harness.hpp>

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spherecir {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "0.1.0";

/// One schema or physics violation, already formatted as "path: message".
using Diagnostics = std::vector<std::string>;

namespace detail {

inline void require_number(const nlohmann::json& j, const std::string& path,
                           const char* key, Diagnostics& diag, double& out) {
    if (!j.contains(key)) {
        diag.push_back(path + "." + key + ": missing required field");
        return;
    }
    if (!j[key].is_number()) {
        diag.push_back(path + "." + key + ": must be a number");
        return;
    }
    out = j[key].get<double>();
}

inline void require_integer(const nlohmann::json& j, const std::string& path,
                            const char* key, Diagnostics& diag, long long& out) {
    if (!j.contains(key)) {
        diag.push_back(path + "." + key + ": missing required field");
        return;
    }
    if (!j[key].is_number_integer()) {
        diag.push_back(path + "." + key + ": must be an integer");
        return;
    }
    out = j[key].get<long long>();
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Parses a scenario, appending every problem found to `diag`. The returned
/// scenario is only meaningful when `diag` stays empty.
inline Scenario scenario_from_json(const nlohmann::json& j, Diagnostics& diag) {
    Scenario sc;
    if (!j.is_object()) {
        diag.push_back("(root): scenario must be a JSON object");
        return sc;
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        diag.push_back("schema_version: missing or not an integer");
    else if (j["schema_version"].get<int>() != kScenarioSchemaVersion)
        diag.push_back("schema_version: unsupported version " +
                       std::to_string(j["schema_version"].get<int>()) + " (expected " +
                       std::to_string(kScenarioSchemaVersion) + ")");
    if (j.contains("name")) {
        if (!j["name"].is_string())
            diag.push_back("name: must be a string");
        else
            sc.name = j["name"].get<std::string>();
    }

    if (!j.contains("medium") || !j["medium"].is_object()) {
        diag.push_back("medium: missing required object");
    } else {
        const nlohmann::json& med = j["medium"];
        detail::require_number(med, "medium", "free_diffusion_um2_per_s", diag,
                               sc.free_diffusion_um2s);
        if (!(sc.free_diffusion_um2s > 0.0))
            diag.push_back("medium.free_diffusion_um2_per_s: must be positive");
        if (!med.contains("layers") || !med["layers"].is_array() ||
            med["layers"].empty()) {
            diag.push_back("medium.layers: must be a non-empty array");
        } else {
            for (std::size_t i = 0; i < med["layers"].size(); ++i) {
                std::string path = "medium.layers[" + std::to_string(i) + "]";
                const nlohmann::json& lj = med["layers"][i];
                if (!lj.is_object()) {
                    diag.push_back(path + ": must be an object");
                    continue;
                }
                Layer layer;
                detail::require_number(lj, path, "width_um", diag, layer.width_um);
                detail::require_number(lj, path, "porosity", diag, layer.porosity);
                if (lj.contains("degradation_per_s"))
                    detail::require_number(lj, path, "degradation_per_s", diag,
                                           layer.degradation_rate);
                if (!(layer.width_um > 0.0))
                    diag.push_back(path + ".width_um: must be positive");
                if (!(layer.porosity > 0.0) || layer.porosity > 1.0)
                    diag.push_back(path + ".porosity: must be in (0, 1]");
                if (layer.degradation_rate < 0.0)
                    diag.push_back(path + ".degradation_per_s: must be >= 0");
                sc.layers.push_back(layer);
            }
        }
        if (med.contains("exterior")) {
            const nlohmann::json& ext = med["exterior"];
            if (!ext.is_object()) {
                diag.push_back("medium.exterior: must be an object");
            } else {
                if (ext.contains("porosity"))
                    detail::require_number(ext, "medium.exterior", "porosity", diag,
                                           sc.exterior_porosity);
                if (ext.contains("degradation_per_s"))
                    detail::require_number(ext, "medium.exterior", "degradation_per_s",
                                           diag, sc.exterior_degradation);
                if (!(sc.exterior_porosity > 0.0) || sc.exterior_porosity > 1.0)
                    diag.push_back("medium.exterior.porosity: must be in (0, 1]");
                if (sc.exterior_degradation < 0.0)
                    diag.push_back("medium.exterior.degradation_per_s: must be >= 0");
            }
        }
    }

    if (!j.contains("source") || !j["source"].is_object()) {
        diag.push_back("source: missing required object");
    } else {
        const nlohmann::json& src = j["source"];
        detail::require_number(src, "source", "r_um", diag, sc.source.r_um);
        detail::require_number(src, "source", "theta_rad", diag, sc.source.theta_rad);
        detail::require_number(src, "source", "phi_rad", diag, sc.source.phi_rad);
        if (src.contains("emission_time_s"))
            detail::require_number(src, "source", "emission_time_s", diag,
                                   sc.source.emission_time_s);
        if (src.contains("molecules"))
            detail::require_integer(src, "source", "molecules", diag,
                                    sc.source.molecule_count);
        if (sc.source.r_um < 0.0) diag.push_back("source.r_um: must be >= 0");
        if (sc.source.emission_time_s < 0.0)
            diag.push_back("source.emission_time_s: must be >= 0");
        if (sc.source.molecule_count < 1)
            diag.push_back("source.molecules: must be >= 1");
    }

    if (!j.contains("receivers") || !j["receivers"].is_array() ||
        j["receivers"].empty()) {
        diag.push_back("receivers: must be a non-empty array");
    } else {
        for (std::size_t i = 0; i < j["receivers"].size(); ++i) {
            std::string path = "receivers[" + std::to_string(i) + "]";
            const nlohmann::json& rj = j["receivers"][i];
            if (!rj.is_object()) {
                diag.push_back(path + ": must be an object");
                continue;
            }
            ObservationPoint obs;
            detail::require_number(rj, path, "r_um", diag, obs.r_um);
            detail::require_number(rj, path, "theta_rad", diag, obs.theta_rad);
            detail::require_number(rj, path, "phi_rad", diag, obs.phi_rad);
            if (obs.r_um < 0.0) diag.push_back(path + ".r_um: must be >= 0");
            sc.receivers.push_back(obs);
        }
    }

    if (!j.contains("analytic") || !j["analytic"].is_object()) {
        diag.push_back("analytic: missing required object");
    } else {
        const nlohmann::json& an = j["analytic"];
        detail::require_number(an, "analytic", "window_s", diag, sc.grid.window_s);
        long long n = sc.grid.num_samples;
        if (an.contains("num_samples"))
            detail::require_integer(an, "analytic", "num_samples", diag, n);
        sc.grid.num_samples = static_cast<int>(n);
        if (an.contains("damping"))
            detail::require_number(an, "analytic", "damping", diag, sc.grid.damping);
        if (!(sc.grid.window_s > 0.0)) diag.push_back("analytic.window_s: must be positive");
        if (sc.grid.num_samples < 8 || sc.grid.num_samples % 2 != 0)
            diag.push_back("analytic.num_samples: must be even and >= 8");
        if (!(sc.grid.damping > 0.0)) diag.push_back("analytic.damping: must be positive");
    }

    if (!j.contains("pbs") || !j["pbs"].is_object()) {
        diag.push_back("pbs: missing required object");
    } else {
        const nlohmann::json& pb = j["pbs"];
        detail::require_number(pb, "pbs", "dt_s", diag, sc.pbs.dt_s);
        long long n = sc.pbs.num_molecules;
        detail::require_integer(pb, "pbs", "num_molecules", diag, n);
        sc.pbs.num_molecules = n;
        long long seed = static_cast<long long>(sc.pbs.seed);
        if (pb.contains("seed")) detail::require_integer(pb, "pbs", "seed", diag, seed);
        if (seed < 0)
            diag.push_back("pbs.seed: must be >= 0");
        else
            sc.pbs.seed = static_cast<std::uint64_t>(seed);
        detail::require_number(pb, "pbs", "receiver_radius_um", diag,
                               sc.pbs.receiver_radius_um);
        if (pb.contains("receiver_radii_um")) {
            if (!pb["receiver_radii_um"].is_array()) {
                diag.push_back("pbs.receiver_radii_um: must be an array");
            } else {
                for (std::size_t i = 0; i < pb["receiver_radii_um"].size(); ++i) {
                    const nlohmann::json& rj = pb["receiver_radii_um"][i];
                    std::string path =
                        "pbs.receiver_radii_um[" + std::to_string(i) + "]";
                    if (!rj.is_number()) {
                        diag.push_back(path + ": must be a number");
                        continue;
                    }
                    double r = rj.get<double>();
                    if (r < 0.0) diag.push_back(path + ": must be >= 0");
                    sc.pbs.receiver_radii_um.push_back(r);
                }
            }
        }
        detail::require_number(pb, "pbs", "duration_s", diag, sc.pbs.duration_s);
        if (!(sc.pbs.dt_s > 0.0)) diag.push_back("pbs.dt_s: must be positive");
        if (sc.pbs.num_molecules < 1) diag.push_back("pbs.num_molecules: must be >= 1");
        if (!(sc.pbs.receiver_radius_um > 0.0))
            diag.push_back("pbs.receiver_radius_um: must be positive");
        if (!(sc.pbs.duration_s > 0.0)) diag.push_back("pbs.duration_s: must be positive");
    }

    if (j.contains("sweep")) {
        const nlohmann::json& sw = j["sweep"];
        if (!sw.is_object()) {
            diag.push_back("sweep: must be an object");
        } else {
            long long layer = -1;
            detail::require_integer(sw, "sweep", "layer", diag, layer);
            sc.sweep_layer = static_cast<int>(layer);
            if (sc.sweep_layer < 0 ||
                static_cast<std::size_t>(sc.sweep_layer) >= sc.layers.size())
                diag.push_back("sweep.layer: index out of range");
            if (!sw.contains("porosities") || !sw["porosities"].is_array() ||
                sw["porosities"].empty()) {
                diag.push_back("sweep.porosities: must be a non-empty array");
            } else {
                for (std::size_t i = 0; i < sw["porosities"].size(); ++i) {
                    const nlohmann::json& pj = sw["porosities"][i];
                    std::string path = "sweep.porosities[" + std::to_string(i) + "]";
                    if (!pj.is_number()) {
                        diag.push_back(path + ": must be a number");
                        continue;
                    }
                    double eps = pj.get<double>();
                    if (!(eps > 0.0) || eps > 1.0)
                        diag.push_back(path + ": must be in (0, 1]");
                    sc.sweep_porosities.push_back(eps);
                }
            }
        }
    }

    // physics-level checks that need the assembled scenario
    if (diag.empty()) {
        try {
            sc.validate();
        } catch (const std::exception& e) {
            diag.push_back(std::string("(scenario): ") + e.what());
        }
    }
    return sc;
}

/// Canonical serialization; round-trips through scenario_from_json.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["name"] = sc.name;
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : sc.layers)
        layers.push_back({{"width_um", l.width_um},
                          {"porosity", l.porosity},
                          {"degradation_per_s", l.degradation_rate}});
    j["medium"] = {{"free_diffusion_um2_per_s", sc.free_diffusion_um2s},
                   {"layers", layers},
                   {"exterior",
                    {{"porosity", sc.exterior_porosity},
                     {"degradation_per_s", sc.exterior_degradation}}}};
    j["source"] = {{"r_um", sc.source.r_um},
                   {"theta_rad", sc.source.theta_rad},
                   {"phi_rad", sc.source.phi_rad},
                   {"emission_time_s", sc.source.emission_time_s},
                   {"molecules", sc.source.molecule_count}};
    nlohmann::json receivers = nlohmann::json::array();
    for (const ObservationPoint& obs : sc.receivers)
        receivers.push_back({{"r_um", obs.r_um},
                             {"theta_rad", obs.theta_rad},
                             {"phi_rad", obs.phi_rad}});
    j["receivers"] = receivers;
    j["analytic"] = {{"window_s", sc.grid.window_s},
                     {"num_samples", sc.grid.num_samples},
                     {"damping", sc.grid.damping}};
    j["pbs"] = {{"dt_s", sc.pbs.dt_s},
                {"num_molecules", sc.pbs.num_molecules},
                {"seed", sc.pbs.seed},
                {"receiver_radius_um", sc.pbs.receiver_radius_um},
                {"duration_s", sc.pbs.duration_s}};
    if (!sc.pbs.receiver_radii_um.empty())
        j["pbs"]["receiver_radii_um"] = sc.pbs.receiver_radii_um;
    if (sc.sweep_layer >= 0)
        j["sweep"] = {{"layer", sc.sweep_layer}, {"porosities", sc.sweep_porosities}};
    return j;
}

/// FNV-1a 64-bit digest of the canonical serialization; identifies the
/// scenario in metadata sidecars.
inline std::string scenario_digest(const Scenario& sc) {
    std::string dump = scenario_to_json(sc).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Loads and fully validates a scenario file; throws with every diagnostic
/// joined on newlines.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": JSON parse error: " + e.what());
    }
    Diagnostics diag;
    Scenario sc = scenario_from_json(j, diag);
    if (!diag.empty()) {
        std::string msg = path + ": invalid scenario:";
        for (const std::string& d : diag) msg += "\n  " + d;
        throw std::runtime_error(msg);
    }
    return sc;
}

/// Validates without throwing; returns the diagnostics (empty means valid).
inline Diagnostics validate_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {"cannot open scenario file: " + path};
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        return {std::string("JSON parse error: ") + e.what()};
    }
    Diagnostics diag;
    scenario_from_json(j, diag);
    return diag;
}

// ---------------------------------------------------------------------------
// artifact writers (CSV schema version 1)
// ---------------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Analytic CIR per receiver: t [s], concentration [1/um^3] per molecule.
inline std::string cir_csv(const TemporalCIR& cir) {
    std::string s = "t_s,concentration_per_um3\n";
    for (std::size_t j = 0; j < cir.time_s.size(); ++j)
        s += detail::fmt(cir.time_s[j]) + "," + detail::fmt(cir.concentration[j]) + "\n";
    return s;
}

/// Particle receiver series: t [s], raw count, normalized concentration.
inline std::string pbs_receiver_csv(const PbsSeries& series, std::size_t receiver) {
    std::string s = "t_s,count,concentration_per_um3\n";
    for (std::size_t j = 0; j < series.time_s.size(); ++j)
        s += detail::fmt(series.time_s[j]) + "," +
             std::to_string(series.receiver_counts[receiver][j]) + "," +
             detail::fmt(series.receiver_concentration[receiver][j]) + "\n";
    return s;
}

/// Particle population summary: t [s], molecules inside/outside the sphere,
/// degraded molecules.
inline std::string pbs_summary_csv(const PbsSeries& series) {
    std::string s = "t_s,inside_count,outside_count,dead_count\n";
    for (std::size_t j = 0; j < series.time_s.size(); ++j)
        s += detail::fmt(series.time_s[j]) + "," +
             std::to_string(series.inside_count[j]) + "," +
             std::to_string(series.outside_count[j]) + "," +
             std::to_string(series.dead_count[j]) + "\n";
    return s;
}

/// Plot-ready long format: one row per (engine, receiver, sample).
inline std::string comparison_csv(const std::string& scenario_name,
                                  const ComparisonReport& report) {
    std::string s = "scenario,engine,receiver,t_s,value\n";
    for (std::size_t rcv = 0; rcv < report.receivers.size(); ++rcv) {
        const ReceiverComparison& rc = report.receivers[rcv];
        for (std::size_t j = 0; j < rc.analytic.time_s.size(); ++j)
            s += scenario_name + ",analytic," + std::to_string(rcv) + "," +
                 detail::fmt(rc.analytic.time_s[j]) + "," +
                 detail::fmt(rc.analytic.concentration[j]) + "\n";
        for (std::size_t j = 0; j < rc.analytic.time_s.size(); ++j)
            s += scenario_name + ",pbs," + std::to_string(rcv) + "," +
                 detail::fmt(rc.analytic.time_s[j]) + "," +
                 detail::fmt(rc.pbs_on_grid[j]) + "\n";
    }
    return s;
}

/// Agreement metrics, one row per receiver.
inline std::string metrics_csv(const ComparisonReport& report) {
    std::string s =
        "receiver,nrmse,peak_value_rel_err,peak_time_rel_err,counting_noise_rel\n";
    for (std::size_t rcv = 0; rcv < report.receivers.size(); ++rcv) {
        const ReceiverComparison& rc = report.receivers[rcv];
        s += std::to_string(rcv) + "," + detail::fmt(rc.nrmse) + "," +
             detail::fmt(rc.peak_value_rel_err) + "," +
             detail::fmt(rc.peak_time_rel_err) + "," +
             detail::fmt(rc.counting_noise_rel) + "\n";
    }
    return s;
}

/**
 * @brief Reproducibility manifest written next to every artifact set.
 *
 * Contains everything needed to regenerate the outputs exactly: the full
 * scenario (with any command-line overrides already applied), its digest,
 * and the format versions.
 */
inline nlohmann::json run_manifest(const Scenario& sc, const std::string& engine) {
    nlohmann::json meta;
    meta["library_version"] = kLibraryVersion;
    meta["schema_version"] = kScenarioSchemaVersion;
    meta["csv_schema_version"] = 1;
    meta["engine"] = engine;
    meta["scenario_digest"] = scenario_digest(sc);
    meta["scenario"] = scenario_to_json(sc);
    return meta;
}

}  // namespace spherecir

#endif  // SPHERECIR_SCENARIO_IO_HPP
