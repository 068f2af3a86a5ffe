/**
 * @file acceptance.cpp
 * @brief End-to-end acceptance gate: eleven numbered checks covering the
 *        special-function layer, the frequency/time-domain solver, the
 *        particle simulator, cross-engine agreement, the porosity-sweep
 *        findings, and artifact determinism.
 *
 * Prints exactly one PASS/FAIL line per check and exits nonzero if any
 * fail. Heavier checks report their runtime against the stated budget.
 */

#include <spherecir/analytic.hpp>
#include <spherecir/harness.hpp>
#include <spherecir/pbs.hpp>
#include <spherecir/scenario_io.hpp>
#include <spherecir/specfun.hpp>
#include <spherecir/timedomain.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace spherecir;

namespace {

int g_failures = 0;

struct Line {
    int index;
    std::string text;
};
std::vector<Line> g_lines;

void report(int index, bool ok, const std::string& label, const std::string& detail) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "[%2d] %s  %s (%s)", index, ok ? "PASS" : "FAIL",
                  label.c_str(), detail.c_str());
    g_lines.push_back({index, buf});
    std::printf("%s\n", buf);  // progress as it happens
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LayerStack reference_stack(double total_radius = 275.0) {
    std::vector<Layer> layers = {{total_radius / 3.0, 0.2964, 0.0},
                                 {total_radius / 3.0, 0.1196, 0.0},
                                 {total_radius / 3.0, 0.1697, 0.0}};
    return LayerStack(layers, 0.1);
}

Complex free_space_laplace(Complex s, double diffusion, double dist) {
    Complex sig = sigma_laplace(0.0, diffusion, s);
    return std::exp(-sig * dist) / (4.0 * M_PI * diffusion * dist);
}

/// P_n(cos gamma) from the order-m product expansion (independent oracle
/// for the collapsed angular sum).
double pn_product_sum(int n, double theta1, double phi1, double theta2, double phi2) {
    double x1 = std::cos(theta1);
    double x2 = std::cos(theta2);
    // (n-m)!/(n+m)! underflows double precision past n ~ 85 while the
    // P_n^m product overflows in the opposite direction; carry the factor
    // in extended precision so their product stays representable
    long double sum = legendre_p(n, 0, x1) * legendre_p(n, 0, x2);
    long double fact = 1.0L;
    for (int m = 1; m <= n; ++m) {
        fact /= static_cast<long double>(n - m + 1) * static_cast<long double>(n + m);
        sum += 2.0L * fact * static_cast<long double>(legendre_p(n, m, x1)) *
               static_cast<long double>(legendre_p(n, m, x2)) *
               static_cast<long double>(std::cos(m * (phi1 - phi2)));
    }
    return static_cast<double>(sum);
}

double chord(double r1, double t1, double p1, double r2, double t2, double p2) {
    double cg =
        std::cos(t1) * std::cos(t2) + std::sin(t1) * std::sin(t2) * std::cos(p1 - p2);
    return std::sqrt(std::max(0.0, r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * cg));
}

// --------------------------------------------------------------------------
// 1. special functions: Wronskian, recurrences, Legendre orthogonality
// --------------------------------------------------------------------------
void check_special_functions() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(12001);
    std::uniform_real_distribution<double> logr(std::log(0.1), std::log(100.0));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    const int nmax = 40;

    double worst_wronskian = 0.0;
    double worst_recurrence = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Complex z = std::polar(std::exp(logr(rng)), phase(rng));
        // Evaluate j x h in the upper half plane where j grows and h decays
        // (their product is O(1)); j x y would cancel catastrophically at
        // large |Im z|. Conjugation reflects the result for Im z < 0.
        Complex zu = (z.imag() >= 0.0) ? z : std::conj(z);
        SphBesselArray j = sph_j_array(zu, nmax);
        SphBesselArray h = sph_h_array(zu, nmax);
        Complex want = Complex(0.0, 1.0) / (zu * zu);  // i (j y' - j' y) = i/z^2
        for (int n = 0; n <= nmax; ++n) {
            Complex w = (j.val[n] * h.dval[n] - j.dval[n] * h.val[n]) *
                        std::exp(j.logs[n] + h.logs[n]);
            worst_wronskian =
                std::max(worst_wronskian, std::abs(w - want) / std::abs(want));
        }
        SphBesselArray y = sph_y_array(zu, nmax);
        // three-term recurrence f_{n-1} + f_{n+1} = (2n+1)/z f_n, scaled to
        // the largest participating magnitude
        for (const SphBesselArray* f : {&j, &y}) {
            for (int n = 1; n < nmax; ++n) {
                double lmax = std::max({f->logs[n - 1], f->logs[n], f->logs[n + 1]});
                Complex a = f->val[n - 1] * std::exp(f->logs[n - 1] - lmax);
                Complex b = f->val[n] * std::exp(f->logs[n] - lmax);
                Complex c = f->val[n + 1] * std::exp(f->logs[n + 1] - lmax);
                Complex lhs = a + c - (2.0 * n + 1.0) / zu * b;
                double scale = std::max({std::abs(a), std::abs(c),
                                         std::abs((2.0 * n + 1.0) / zu * b)});
                if (scale > 0.0)
                    worst_recurrence = std::max(worst_recurrence, std::abs(lhs) / scale);
            }
        }
    }

    // Legendre orthogonality via 64-point Gauss-Legendre (exact through
    // degree 127 >= n + m = 80)
    auto nodes = gauss_legendre(64);
    double worst_legendre = 0.0;
    for (int n = 0; n <= 40; n += 4) {
        for (int m = 0; m <= n; m += 4) {
            double integral = 0.0;
            for (const auto& [x, w] : nodes)
                integral += w * legendre_p(n, 0, x) * legendre_p(m, 0, x);
            double want = (n == m) ? 2.0 / (2.0 * n + 1.0) : 0.0;
            worst_legendre = std::max(worst_legendre, std::abs(integral - want));
        }
    }

    double dt = seconds_since(t0);
    bool ok = worst_wronskian < 1e-10 && worst_recurrence < 1e-10 &&
              worst_legendre < 1e-8 && dt < 10.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "wronskian %.2e, recurrence %.2e, orthogonality %.2e, %.1f s",
                  worst_wronskian, worst_recurrence, worst_legendre, dt);
    report(1, ok, "special-function identities", detail);
}

// --------------------------------------------------------------------------
// 2. boundary residuals on randomized stacks
// --------------------------------------------------------------------------
void check_boundary_residuals() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(12002);
    std::uniform_int_distribution<int> layer_count(2, 6);
    std::uniform_real_distribution<double> width(20.0, 120.0);
    std::uniform_real_distribution<double> poro(0.05, 1.0);
    std::uniform_int_distribution<int> order(0, 30);
    std::uniform_real_distribution<double> logw(std::log(1e-4), std::log(1.0));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    double worst = 0.0;
    for (int stack_id = 0; stack_id < 50; ++stack_id) {
        int nl = layer_count(rng);
        std::vector<Layer> layers;
        for (int i = 0; i < nl; ++i) layers.push_back({width(rng), poro(rng), 0.0});
        LayerStack stack(layers, 0.1, poro(rng), 0.0);

        // source inside a random region (or outside), off every interface
        double r0;
        do {
            r0 = uni(rng) * stack.outer_radius() * 1.5 + 1.0;
        } while (stack.on_interface(r0));
        SourceSpec src{r0, 0.0, 0.0, 0.0, 1};

        for (int trial = 0; trial < 5; ++trial) {
            double omega = std::exp(logw(rng));
            FrequencySolver solver(stack, src, Complex(0.0, omega));
            worst = std::max(worst, solver.boundary_residual(order(rng)));
        }
    }
    double dt = seconds_since(t0);
    bool ok = worst < 1e-8 && dt < 60.0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max residual %.2e over 50 stacks, %.1f s",
                  worst, dt);
    report(2, ok, "interface residuals on random stacks", detail);
}

// --------------------------------------------------------------------------
// 3. collapsed single sum vs the literal order-m double sum
// --------------------------------------------------------------------------
void check_angular_equivalence() {
    auto t0 = std::chrono::steady_clock::now();
    LayerStack stack = reference_stack();
    std::mt19937_64 rng(12003);
    std::uniform_real_distribution<double> ratio(0.25, 0.55);
    std::uniform_real_distribution<double> theta(0.05, M_PI - 0.05);
    std::uniform_real_distribution<double> phi(-M_PI, M_PI);
    std::uniform_real_distribution<double> logw(std::log(1e-3), std::log(1e-2));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Two precision budgets shape the random geometries.  First, the series
    // terms stay flat in magnitude up to n ~ |sigma|_max * r_min and the
    // interface systems leave the well-conditioned regime near n ~ 100, so
    // |sigma|_max * r_min is capped to land the 1e-12 stop safely below that.
    // Second, the chordal attenuation e^{-sigma d} is reproduced by
    // cancellation among terms of size e^{-sigma dr}; relative accuracy is
    // limited by eps * e^{sigma (d - dr)}, so the source-observer angle is
    // capped to keep that cancellation factor at e^6.
    const double sigma_over_sqrt_w = std::sqrt(1.0 / 0.00414);  // slowest layer
    SeriesOptions tight;
    tight.tol = 1e-12;

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        double omega = std::exp(logw(rng));
        double re_sigma = sigma_over_sqrt_w * std::sqrt(omega / 2.0);
        double r_inner_cap =
            std::min(150.0, 35.0 / (sigma_over_sqrt_w * std::sqrt(omega)));
        double r_in, r_out;
        do {
            r_in = 5.0 + (r_inner_cap - 5.0) * unit(rng);
            r_out = std::min(r_in / ratio(rng), 900.0);
        } while (stack.on_interface(r_in) || stack.on_interface(r_out));
        double r_src = (trial % 2 == 0) ? r_in : r_out;
        double r_obs = (trial % 2 == 0) ? r_out : r_in;

        double d_max = (r_out - r_in) + 6.0 / re_sigma;
        double cg_min =
            (r_in * r_in + r_out * r_out - d_max * d_max) / (2.0 * r_in * r_out);
        cg_min = std::clamp(cg_min, -1.0, 1.0);
        double gamma = std::acos(cg_min) * unit(rng);
        double th_s = theta(rng), ph_s = phi(rng), psi = phi(rng);
        std::array<double, 3> u{std::sin(th_s) * std::cos(ph_s),
                                std::sin(th_s) * std::sin(ph_s), std::cos(th_s)};
        std::array<double, 3> a{-std::sin(ph_s), std::cos(ph_s), 0.0};
        std::array<double, 3> b{u[1] * a[2] - u[2] * a[1], u[2] * a[0] - u[0] * a[2],
                                u[0] * a[1] - u[1] * a[0]};
        std::array<double, 3> v;
        for (int k = 0; k < 3; ++k)
            v[k] = std::cos(gamma) * u[k] +
                   std::sin(gamma) * (std::cos(psi) * a[k] + std::sin(psi) * b[k]);
        SourceSpec src{r_src, th_s, ph_s, 0.0, 1};
        ObservationPoint obs{r_obs, std::acos(std::clamp(v[2], -1.0, 1.0)),
                             std::atan2(v[1], v[0])};
        Complex s(0.0, omega);

        FrequencySolver solver(stack, src, s, tight);
        Complex single = solver.greens(obs);
        Complex dbl = 0.0;
        int quiet = 0;
        for (int n = 0; n <= 130 && quiet < 3; ++n) {
            Complex term = (2.0 * n + 1.0) / (4.0 * M_PI) *
                           pn_product_sum(n, obs.theta_rad, obs.phi_rad,
                                          src.theta_rad, src.phi_rad) *
                           solver.radial(n, obs.r_um);
            dbl += term;
            quiet = (n >= 8 && std::abs(term) < 1e-12 * std::abs(dbl)) ? quiet + 1 : 0;
        }
        worst = std::max(worst, std::abs(dbl - single) / std::abs(single));
    }
    double dt = seconds_since(t0);
    bool ok = worst < 1e-10 && dt < 30.0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max relative gap %.2e, %.1f s", worst, dt);
    report(3, ok, "single sum equals literal double sum", detail);
}

// --------------------------------------------------------------------------
// 4. homogeneous reduction, frequency domain
// --------------------------------------------------------------------------
void check_homogeneous_frequency() {
    double diffusion = 0.1;
    LayerStack homo({{10.0, 1.0, 0.0}}, diffusion);
    SourceSpec src{3.0, 0.0, 0.0, 0.0, 1};
    double worst = 0.0;
    for (double d : {5.0, 11.0, 23.0, 50.0, 101.0, 200.0}) {
        for (double omega : {1e-4, 1e-3, 1e-2, 1e-1}) {
            FrequencySolver solver(homo, src, Complex(0.0, omega));
            ObservationPoint obs{src.r_um + d, 0.0, 0.0};
            Complex want = free_space_laplace(Complex(0.0, omega), diffusion, d);
            Complex got = solver.greens(obs);
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
    }
    char detail[64];
    std::snprintf(detail, sizeof(detail), "max relative error %.2e", worst);
    report(4, worst < 1e-6, "homogeneous frequency-domain reduction", detail);
}

// --------------------------------------------------------------------------
// 5. homogeneous reduction, time domain
// --------------------------------------------------------------------------
void check_homogeneous_time() {
    double diffusion = 0.1, d = 50.0;
    double t_star = d * d / (6.0 * diffusion);
    LayerStack homo({{10.0, 1.0, 0.0}}, diffusion);
    SourceSpec src{3.0, 0.0, 0.0, 0.0, 1};
    ObservationPoint obs{src.r_um + d, 0.0, 0.0};
    TransformGrid grid = default_grid(d, diffusion);
    TemporalCIR cir = compute_cir(homo, src, obs, grid);

    auto kernel = [&](double t) {
        return std::exp(-d * d / (4.0 * diffusion * t)) /
               std::pow(4.0 * M_PI * diffusion * t, 1.5);
    };
    double peak_exact = kernel(t_star);
    double peak_err = 1e300, range_err = 0.0;
    for (std::size_t i = 0; i < cir.time_s.size(); ++i) {
        double t = cir.time_s[i];
        if (std::abs(t - t_star) < grid.time_step())
            peak_err = std::min(peak_err,
                                std::abs(cir.concentration[i] - peak_exact) / peak_exact);
        if (t >= 0.2 * t_star && t <= 5.0 * t_star)
            range_err = std::max(
                range_err, std::abs(cir.concentration[i] - kernel(t)) / peak_exact);
    }
    bool ok = peak_err < 0.02 && range_err < 0.05;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "peak %.2f%%, range %.2f%% of peak",
                  100.0 * peak_err, 100.0 * range_err);
    report(5, ok, "homogeneous time-domain reduction", detail);
}

// --------------------------------------------------------------------------
// 6. mass conservation on the conservative three-layer reference stack
// --------------------------------------------------------------------------
void check_mass_conservation() {
    LayerStack stack = reference_stack();
    SourceSpec src{45.83, M_PI / 2.0, M_PI / 2.0, 0.0, 1};
    TransformGrid grid{200000.0, 1024, 15.0};
    double r_ext = stack.outer_radius() +
                   4.0 * std::sqrt(2.0 * stack.diffusion(3) * grid.window_s);
    TemporalCIR mass = mass_history(stack, src, grid, r_ext);
    double worst = 0.0;
    for (double frac : {0.1, 0.45, 0.8}) {
        double t = frac * grid.window_s;
        double m = interpolate_series(mass.time_s, mass.concentration, t);
        worst = std::max(worst, std::abs(m - 1.0));
    }
    char detail[64];
    std::snprintf(detail, sizeof(detail), "max |mass - 1| = %.2e", worst);
    report(6, worst < 0.01, "mass conservation at early/peak/late times", detail);
}

// --------------------------------------------------------------------------
// 7. particle-simulator statistical sanity
// --------------------------------------------------------------------------
void check_pbs_statistics() {
    const int draws = 1000000;
    double diffusion = 1.0, dt = 0.05;
    std::mt19937_64 rng = particle_rng(777, 0);
    double sum[3] = {0, 0, 0}, sum2[3] = {0, 0, 0};
    for (int i = 0; i < draws; ++i) {
        Vec3 step = brownian_step(diffusion, dt, rng);
        double comp[3] = {step.x, step.y, step.z};
        for (int a = 0; a < 3; ++a) {
            sum[a] += comp[a];
            sum2[a] += comp[a] * comp[a];
        }
    }
    double want_var = 2.0 * diffusion * dt;
    double worst_var = 0.0;
    for (int a = 0; a < 3; ++a) {
        double mean = sum[a] / draws;
        double var = sum2[a] / draws - mean * mean;
        worst_var = std::max(worst_var, std::abs(var - want_var) / want_var);
    }

    // degradation: survival over one step with k dt = ln 2 is a fair coin
    LayerStack degrading({{1000.0, 1.0, std::log(2.0) / dt}}, diffusion);
    long long survivors = 0;
    std::mt19937_64 rng2 = particle_rng(778, 1);
    for (int i = 0; i < draws; ++i)
        if (survives_step({1.0, 0.0, 0.0}, degrading, dt, rng2)) ++survivors;
    double sigma = std::sqrt(0.25 * draws);
    double pull = std::abs(static_cast<double>(survivors) - 0.5 * draws) / sigma;

    bool ok = worst_var < 0.01 && pull < 3.0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "variance error %.3f%%, survival pull %.2f sigma",
                  100.0 * worst_var, pull);
    report(7, ok, "particle statistics (variance, degradation)", detail);
}

// --------------------------------------------------------------------------
// 8 + 11. desk-scale cross-engine comparison and artifact determinism
// --------------------------------------------------------------------------
std::vector<std::string> comparison_artifacts(const Scenario& sc,
                                              const ComparisonReport& report) {
    std::vector<std::string> files;
    for (const ReceiverComparison& rc : report.receivers)
        files.push_back(cir_csv(rc.analytic));
    for (std::size_t rcv = 0; rcv < sc.receivers.size(); ++rcv)
        files.push_back(pbs_receiver_csv(report.pbs, rcv));
    files.push_back(pbs_summary_csv(report.pbs));
    return files;
}

void check_cross_engine_and_determinism() {
    Scenario sc = desk_internal_scenario();
    auto t0 = std::chrono::steady_clock::now();
    ComparisonReport first = run_comparison(sc, 2);
    double dt = seconds_since(t0);

    double worst_nrmse = 0.0, worst_peak_time = 0.0;
    for (const ReceiverComparison& rc : first.receivers) {
        worst_nrmse = std::max(worst_nrmse, rc.nrmse);
        worst_peak_time = std::max(worst_peak_time, rc.peak_time_rel_err);
    }
    bool ok8 = worst_nrmse < 0.10 && worst_peak_time < 0.15 && dt < 300.0;
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "max NRMSE %.1f%%, max peak-time error %.1f%%, %.0f s",
                  100.0 * worst_nrmse, 100.0 * worst_peak_time, dt);
    report(8, ok8, "cross-engine agreement at desk scale", detail);

    // same scenario, different worker count: artifacts must match byte for byte
    ComparisonReport second = run_comparison(sc, 5);
    std::vector<std::string> a = comparison_artifacts(sc, first);
    std::vector<std::string> b = comparison_artifacts(sc, second);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++mismatches;
    char detail11[96];
    std::snprintf(detail11, sizeof(detail11),
                  "%zu of %zu CSV artifacts identical across worker counts",
                  a.size() - mismatches, a.size());
    report(11, mismatches == 0 && a.size() == 9, "fixed-seed artifact determinism",
           detail11);
}

// --------------------------------------------------------------------------
// 9. internal source: outer-layer porosity vs external peak ordering
// --------------------------------------------------------------------------
void check_internal_source_ordering() {
    Scenario sc = desk_internal_scenario();
    sc.receivers = {{38.0, M_PI / 2.0, M_PI / 2.0}};  // external receiver only
    sc.pbs.receiver_radii_um = {10.0};
    sc.grid = TransformGrid{80000.0, 8192, 15.0};
    sc.pbs.dt_s = 4.0;
    sc.pbs.duration_s = 80000.0;
    sc.pbs.num_molecules = 40000;
    sc.source.molecule_count = 40000;

    std::vector<double> eps = {0.1697, 0.10, 0.05};
    auto points = porosity_sweep(sc, 2, eps, /*with_pbs=*/true, 2);

    bool analytic_ok = true, pbs_ok = true;
    std::vector<double> a_time, a_value, p_time, p_value;
    for (const SweepPoint& pt : points) {
        a_time.push_back(pt.peaks[0].peak_time);
        a_value.push_back(pt.peaks[0].peak_value);
        // particle peak via the same FWHM-matched smoothing as the harness
        std::size_t half = static_cast<std::size_t>(
            std::clamp(pt.peaks[0].fwhm / (8.0 * sc.pbs.dt_s), 1.0,
                       static_cast<double>(pt.pbs.time_s.size()) / 8.0));
        std::vector<double> smooth =
            boxcar_smooth(pt.pbs.receiver_concentration[0], half);
        std::size_t arg = 0;
        for (std::size_t k = 1; k < smooth.size(); ++k)
            if (smooth[k] > smooth[arg]) arg = k;
        p_time.push_back(pt.pbs.time_s[arg]);
        p_value.push_back(smooth[arg]);
    }
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        analytic_ok &= a_time[i] < a_time[i + 1] && a_value[i] > a_value[i + 1];
        pbs_ok &= p_time[i] < p_time[i + 1] && p_value[i] > p_value[i + 1];
    }
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "analytic t {%.0f,%.0f,%.0f} v {%.2e,%.2e,%.2e}; "
                  "pbs t {%.0f,%.0f,%.0f} v {%.2e,%.2e,%.2e}",
                  a_time[0], a_time[1], a_time[2], a_value[0], a_value[1], a_value[2],
                  p_time[0], p_time[1], p_time[2], p_value[0], p_value[1], p_value[2]);
    report(9, analytic_ok && pbs_ok,
           "lower outer porosity: later, lower external peak", detail);
}

// --------------------------------------------------------------------------
// 10. external source: inside count at a fixed late time
// --------------------------------------------------------------------------
void check_external_source_ordering() {
    Scenario sc = desk_external_scenario();
    sc.receivers = {{13.75, M_PI / 2.0, M_PI / 2.0}};
    sc.pbs.receiver_radii_um = {3.0};
    sc.grid = TransformGrid{20000.0, 4096, 15.0};
    sc.pbs.dt_s = 2.0;
    sc.pbs.duration_s = 12000.0;
    sc.pbs.num_molecules = 50000;
    sc.source.molecule_count = 50000;
    double t_late = 10000.0;

    std::vector<double> eps = {0.1697, 0.10, 0.05};
    auto points = porosity_sweep(sc, 2, eps, /*with_pbs=*/true, 2);

    std::vector<double> analytic_mass, pbs_fraction;
    for (const SweepPoint& pt : points) {
        analytic_mass.push_back(interpolate_series(pt.analytic_inside_mass.time_s,
                                                   pt.analytic_inside_mass.concentration,
                                                   t_late));
        std::vector<double> inside(pt.pbs.inside_count.begin(),
                                   pt.pbs.inside_count.end());
        pbs_fraction.push_back(interpolate_series(pt.pbs.time_s, inside, t_late) /
                               static_cast<double>(sc.pbs.num_molecules));
    }
    bool ok = true;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        ok &= analytic_mass[i] < analytic_mass[i + 1] &&
              pbs_fraction[i] < pbs_fraction[i + 1];
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "analytic {%.4f,%.4f,%.4f}; pbs {%.4f,%.4f,%.4f} at t = %.0f s",
                  analytic_mass[0], analytic_mass[1], analytic_mass[2], pbs_fraction[0],
                  pbs_fraction[1], pbs_fraction[2], t_late);
    report(10, ok, "lower outer porosity: more molecules retained inside", detail);
}

}  // namespace

int main() {
    check_special_functions();
    check_boundary_residuals();
    check_angular_equivalence();
    check_homogeneous_frequency();
    check_homogeneous_time();
    check_mass_conservation();
    check_pbs_statistics();
    check_cross_engine_and_determinism();  // prints lines 8 and 11
    check_internal_source_ordering();
    check_external_source_ordering();

    std::sort(g_lines.begin(), g_lines.end(),
              [](const Line& a, const Line& b) { return a.index < b.index; });
    std::printf("\n=== summary ===\n");
    for (const Line& l : g_lines) std::printf("%s\n", l.text.c_str());
    std::printf("%s: %d of 11 checks failed\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
