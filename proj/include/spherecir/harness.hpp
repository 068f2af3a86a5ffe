#ifndef SPHERECIR_HARNESS_HPP
#define SPHERECIR_HARNESS_HPP

/**
 * @file harness.hpp
 * @brief Cross-engine study driver: runs the analytic solver and the
 *        Brownian simulator on one scenario, computes agreement metrics,
 *        and sweeps a layer porosity.
 *
 * The analytic leg is evaluated as the average over each receiver ball
 * (32-point product quadrature: 4 radial Gauss-Legendre x 8 cube-vertex
 * directions), matching what the particle counter measures; the center
 * value can differ visibly near the source at realistic receiver radii.
 *
 * NRMSE is the root-mean-square difference over the common time grid
 * (particle series linearly interpolated onto the analytic grid) divided
 * by the analytic peak value.
 */

#include <spherecir/medium.hpp>
#include <spherecir/pbs.hpp>
#include <spherecir/timedomain.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace spherecir {

/// Complete description of one comparison study; serializable (see
/// scenario_io.hpp) and engine-agnostic.
struct Scenario {
    std::string name = "scenario";
    std::vector<Layer> layers;
    double free_diffusion_um2s = 0.1;
    double exterior_porosity = 1.0;
    double exterior_degradation = 0.0;
    SourceSpec source;
    std::vector<ObservationPoint> receivers;
    TransformGrid grid;
    PbsConfig pbs;
    int sweep_layer = -1;                 ///< 0-based layer index, -1 = no sweep
    std::vector<double> sweep_porosities; ///< values for the swept layer

    LayerStack stack() const {
        return LayerStack(layers, free_diffusion_um2s, exterior_porosity,
                          exterior_degradation);
    }

    void validate() const {
        LayerStack s = stack();  // layer/medium validation
        s.validate_source(source);
        grid.validate();
        pbs.validate();
        if (receivers.empty())
            throw std::invalid_argument("Scenario: at least one receiver required");
        for (std::size_t i = 0; i < receivers.size(); ++i) {
            const ObservationPoint& rec = receivers[i];
            if (!(rec.r_um >= 0.0))
                throw std::invalid_argument("Scenario: receiver " + std::to_string(i) +
                                            " radius must be >= 0");
            Vec3 c = spherical_to_cartesian(rec.r_um, rec.theta_rad, rec.phi_rad);
            Vec3 src =
                spherical_to_cartesian(source.r_um, source.theta_rad, source.phi_rad);
            if ((c - src).norm() < 1e-9)
                throw std::invalid_argument("Scenario: receiver " + std::to_string(i) +
                                            " coincides with the source position");
            // a counting ball containing the source sees an unresolvable
            // concentration spike at t -> 0+; reject the geometry outright
            if ((c - src).norm() <= pbs.radius_for(i))
                throw std::invalid_argument("Scenario: receiver " + std::to_string(i) +
                                            " counting ball contains the source");
        }
        if (sweep_layer >= 0) {
            if (static_cast<std::size_t>(sweep_layer) >= layers.size())
                throw std::invalid_argument("Scenario: sweep layer index out of range");
            if (sweep_porosities.empty())
                throw std::invalid_argument("Scenario: sweep porosity list is empty");
            for (double eps : sweep_porosities)
                if (!(eps > 0.0) || eps > 1.0)
                    throw std::invalid_argument(
                        "Scenario: sweep porosity values must be in (0, 1]");
        }
    }
};

/// 32-point receiver-ball quadrature: Cartesian offsets and weights that
/// average a field over a ball of radius a (exact through cubic angular and
/// cubic radial variation).
inline std::vector<std::pair<Vec3, double>> receiver_ball_rule(double radius) {
    if (!(radius > 0.0))
        throw std::invalid_argument("receiver_ball_rule: radius must be positive");
    auto radial = gauss_legendre(4);  // on [-1, 1] -> map to [0, a]
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    std::vector<Vec3> dirs;
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (double sz : {-1.0, 1.0})
                dirs.push_back({sx * inv_sqrt3, sy * inv_sqrt3, sz * inv_sqrt3});

    std::vector<std::pair<Vec3, double>> rule;
    rule.reserve(32);
    double a3_over_3 = radius * radius * radius / 3.0;
    for (const auto& [x, w] : radial) {
        double r = 0.5 * (x + 1.0) * radius;
        double wr = 0.5 * radius * w * r * r / a3_over_3;  // ball-average radial weight
        for (const Vec3& dir : dirs) rule.push_back({dir * r, wr / 8.0});
    }
    return rule;
}

/// Ball-averaged analytic CIRs, one per receiver, on the scenario grid.
inline std::vector<TemporalCIR> analytic_receiver_cirs(const Scenario& sc,
                                                       unsigned threads = 0) {
    LayerStack stack = sc.stack();
    std::vector<std::vector<std::pair<Vec3, double>>> rules;
    for (std::size_t i = 0; i < sc.receivers.size(); ++i)
        rules.push_back(receiver_ball_rule(sc.pbs.radius_for(i)));
    std::size_t rule_size = rules.front().size();
    std::vector<ObservationPoint> points;
    points.reserve(sc.receivers.size() * rule_size);
    for (std::size_t i = 0; i < sc.receivers.size(); ++i) {
        const ObservationPoint& rec = sc.receivers[i];
        Vec3 center = spherical_to_cartesian(rec.r_um, rec.theta_rad, rec.phi_rad);
        for (const auto& [offset, w] : rules[i]) {
            Vec3 p = center + offset;
            double r = p.norm();
            double theta = (r > 0.0) ? std::acos(std::clamp(p.z / r, -1.0, 1.0)) : 0.0;
            double phi = std::atan2(p.y, p.x);
            points.push_back({r, theta, phi});
        }
    }
    auto sweep = spectral_sweep(stack, sc.source, points, sc.grid, {}, threads);

    std::vector<TemporalCIR> cirs;
    cirs.reserve(sc.receivers.size());
    std::vector<Complex> avg(static_cast<std::size_t>(sc.grid.num_frequencies()));
    for (std::size_t rcv = 0; rcv < sc.receivers.size(); ++rcv) {
        std::fill(avg.begin(), avg.end(), Complex(0.0));
        for (std::size_t q = 0; q < rule_size; ++q) {
            const std::vector<Complex>& spec = sweep[rcv * rule_size + q];
            double w = rules[rcv][q].second;
            for (std::size_t m = 0; m < avg.size(); ++m) avg[m] += w * spec[m];
        }
        cirs.push_back(inverse_transform(avg, sc.grid));
    }
    return cirs;
}

/// Linear interpolation of a sampled series onto a query time.
inline double interpolate_series(const std::vector<double>& times,
                                 const std::vector<double>& values, double t) {
    if (times.empty()) throw std::invalid_argument("interpolate_series: empty series");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    std::size_t hi =
        static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) -
                                 times.begin());
    std::size_t lo = hi - 1;
    double f = (t - times[lo]) / (times[hi] - times[lo]);
    return values[lo] + f * (values[hi] - values[lo]);
}

/// Boxcar smoothing for peak extraction from noisy particle counts.
inline std::vector<double> boxcar_smooth(const std::vector<double>& v, std::size_t half) {
    if (half == 0) return v;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t lo = (i > half) ? i - half : 0;
        std::size_t hi = std::min(v.size() - 1, i + half);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += v[j];
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

/// Per-receiver agreement metrics plus the underlying series.
struct ReceiverComparison {
    double nrmse = 0.0;
    double peak_value_rel_err = 0.0;
    double peak_time_rel_err = 0.0;
    double counting_noise_rel = 0.0;  ///< 1/sqrt(expected peak count)
    TemporalCIR analytic;
    std::vector<double> pbs_on_grid;  ///< particle series on the analytic grid
};

struct ComparisonReport {
    std::vector<ReceiverComparison> receivers;
    PbsSeries pbs;
};

/// Runs both engines on the identical scenario and scores the agreement.
inline ComparisonReport run_comparison(const Scenario& sc, unsigned threads = 0) {
    sc.validate();
    ComparisonReport report;
    std::vector<TemporalCIR> analytic = analytic_receiver_cirs(sc, threads);
    report.pbs = run_scenario(sc.stack(), sc.source, sc.receivers, sc.pbs, threads);

    double t_max = std::min(sc.grid.window_s, report.pbs.time_s.back());
    for (std::size_t rcv = 0; rcv < sc.receivers.size(); ++rcv) {
        ReceiverComparison rc;
        rc.analytic = std::move(analytic[rcv]);
        PeakMetrics pa = peak_metrics(rc.analytic);

        rc.pbs_on_grid.resize(rc.analytic.time_s.size());
        for (std::size_t j = 0; j < rc.analytic.time_s.size(); ++j)
            rc.pbs_on_grid[j] =
                interpolate_series(report.pbs.time_s,
                                   report.pbs.receiver_concentration[rcv],
                                   rc.analytic.time_s[j]);

        double sum_sq = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < rc.analytic.time_s.size(); ++j) {
            if (rc.analytic.time_s[j] > t_max) break;
            double diff = rc.pbs_on_grid[j] - rc.analytic.concentration[j];
            sum_sq += diff * diff;
            ++count;
        }
        rc.nrmse = std::sqrt(sum_sq / static_cast<double>(count)) / pa.peak_value;

        // peak extraction from the particle series: smooth over ~1/4 of the
        // analytic FWHM (negligible bias on the peak, strong noise reduction
        // on flat late-time peaks)
        std::size_t half = static_cast<std::size_t>(
            std::clamp(pa.fwhm / (8.0 * sc.pbs.dt_s), 1.0,
                       static_cast<double>(report.pbs.time_s.size()) / 8.0));
        std::vector<double> smooth =
            boxcar_smooth(report.pbs.receiver_concentration[rcv], half);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < smooth.size(); ++k)
            if (smooth[k] > smooth[arg]) arg = k;
        double pbs_peak_value = smooth[arg];
        double pbs_peak_time = report.pbs.time_s[arg];
        rc.peak_value_rel_err = std::abs(pbs_peak_value - pa.peak_value) / pa.peak_value;
        rc.peak_time_rel_err = std::abs(pbs_peak_time - pa.peak_time) / pa.peak_time;

        double volume = 4.0 / 3.0 * M_PI * std::pow(sc.pbs.radius_for(rcv), 3);
        double expected_peak_count =
            pa.peak_value * volume * static_cast<double>(sc.pbs.num_molecules);
        rc.counting_noise_rel =
            (expected_peak_count > 0.0) ? 1.0 / std::sqrt(expected_peak_count) : 1.0;
        report.receivers.push_back(std::move(rc));
    }
    return report;
}

/// One sweep point: the scenario re-run with the swept layer's porosity
/// replaced, plus retention histories from both engines.
struct SweepPoint {
    double porosity = 0.0;
    std::vector<TemporalCIR> analytic;     ///< ball-averaged CIR per receiver
    std::vector<PeakMetrics> peaks;        ///< per receiver
    PbsSeries pbs;                          ///< empty when with_pbs = false
    TemporalCIR analytic_inside_mass;      ///< mass within the outer radius
    bool has_pbs = false;
};

/**
 * @brief Re-runs the scenario for each porosity value of one layer.
 *
 * Ordered as given; each point carries peak metrics per receiver, the
 * analytic inside-sphere mass history, and (optionally) the particle run
 * with its inside/outside molecule counts.
 */
inline std::vector<SweepPoint> porosity_sweep(const Scenario& base, int layer_index,
                                              const std::vector<double>& porosities,
                                              bool with_pbs = true,
                                              unsigned threads = 0) {
    if (layer_index < 0 ||
        static_cast<std::size_t>(layer_index) >= base.layers.size())
        throw std::invalid_argument("porosity_sweep: layer index out of range");
    if (porosities.empty())
        throw std::invalid_argument("porosity_sweep: no porosity values");

    std::vector<SweepPoint> points;
    points.reserve(porosities.size());
    for (double eps : porosities) {
        Scenario sc = base;
        sc.layers[static_cast<std::size_t>(layer_index)].porosity = eps;
        sc.validate();

        SweepPoint pt;
        pt.porosity = eps;
        pt.analytic = analytic_receiver_cirs(sc, threads);
        for (const TemporalCIR& cir : pt.analytic) pt.peaks.push_back(peak_metrics(cir));
        LayerStack stack = sc.stack();
        pt.analytic_inside_mass =
            mass_history(stack, sc.source, sc.grid, stack.outer_radius(), {}, threads);
        if (with_pbs) {
            pt.pbs = run_scenario(stack, sc.source, sc.receivers, sc.pbs, threads);
            pt.has_pbs = true;
        }
        points.push_back(std::move(pt));
    }
    return points;
}

/// Three-layer desk-scale fixture: the reference geometry shrunk 10x in
/// length (100x in time) with porosities preserved.
inline std::vector<Layer> desk_layers() {
    return {{27.5 / 3.0, 0.2964, 0.0},
            {27.5 / 3.0, 0.1196, 0.0},
            {27.5 / 3.0, 0.1697, 0.0}};
}

/// Full-scale three-layer fixture (R = 275 um).
inline std::vector<Layer> full_layers() {
    return {{275.0 / 3.0, 0.2964, 0.0},
            {275.0 / 3.0, 0.1196, 0.0},
            {275.0 / 3.0, 0.1697, 0.0}};
}

/// Desk-scale comparison scenario: internal source in layer 1, receivers in
/// every layer and outside, porosity sweep on the outer layer.
inline Scenario desk_internal_scenario() {
    Scenario sc;
    sc.name = "desk-internal";
    sc.layers = desk_layers();
    sc.free_diffusion_um2s = 0.1;
    sc.source = {4.583, M_PI / 2.0, M_PI / 2.0, 0.0, 100000};
    // one receiver per layer plus one outside; counting balls grow with
    // distance so every receiver collects usable statistics
    sc.receivers = {{8.8, M_PI / 2.0, M_PI / 2.0},
                    {13.75, M_PI / 2.0, M_PI / 2.0},
                    {22.0, M_PI / 2.0, M_PI / 2.0},
                    {38.0, M_PI / 2.0, M_PI / 2.0}};
    sc.grid = TransformGrid{20000.0, 8192, 15.0};
    sc.pbs = PbsConfig{2.0, 100000, 20240817, 2.0, 20000.0};
    sc.pbs.receiver_radii_um = {2.0, 3.0, 3.5, 10.0};
    sc.sweep_layer = 2;
    sc.sweep_porosities = {0.1697, 0.10, 0.05};
    return sc;
}

/// Desk-scale external-source scenario (scaled 600 um position).
inline Scenario desk_external_scenario() {
    Scenario sc = desk_internal_scenario();
    sc.name = "desk-external";
    sc.source = {60.0, M_PI / 2.0, M_PI / 2.0, 0.0, 100000};
    sc.receivers = {{13.75, M_PI / 2.0, M_PI / 2.0}, {22.0, M_PI / 2.0, M_PI / 2.0}};
    sc.pbs.receiver_radii_um = {3.0, 3.5};
    return sc;
}

/// Full-scale reference scenario (runtime: hours of simulated transport;
/// intended for the CLI's full-scale flag, not for CI).
inline Scenario full_internal_scenario() {
    Scenario sc = desk_internal_scenario();
    sc.name = "full-internal";
    sc.layers = full_layers();
    sc.source = {45.83, M_PI / 2.0, M_PI / 2.0, 0.0, 100000};
    sc.receivers = {{88.0, M_PI / 2.0, M_PI / 2.0},
                    {137.5, M_PI / 2.0, M_PI / 2.0},
                    {220.0, M_PI / 2.0, M_PI / 2.0},
                    {380.0, M_PI / 2.0, M_PI / 2.0}};
    sc.grid = TransformGrid{2000000.0, 8192, 15.0};
    sc.pbs = PbsConfig{0.5, 100000, 20240817, 20.0, 2000000.0};
    sc.pbs.receiver_radii_um = {20.0, 30.0, 35.0, 100.0};
    return sc;
}

}  // namespace spherecir

#endif  // SPHERECIR_HARNESS_HPP
