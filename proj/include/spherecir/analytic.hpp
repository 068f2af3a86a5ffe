#ifndef SPHERECIR_ANALYTIC_HPP
#define SPHERECIR_ANALYTIC_HPP

/**
 * @file analytic.hpp
 * @brief Frequency-domain Green's function of a point impulse in a layered
 *        sphere, built from per-order radial interface systems.
 *
 * For each harmonic order n the field in every layer (the source layer split
 * at r0 into two sublayers) is a combination of spherical Bessel functions
 * of complex argument k r, with k = i sigma and sigma = sqrt((k_deg + s)/D)
 * taken as the principal root; s is the Laplace variable (s = i omega for a
 * plain Fourier evaluation, Re s > 0 for the damped inverse transform).
 * Im k >= 0 then makes h_n(k r) the decaying solution at infinity.
 *
 * Basis per sublayer: the regular part j_n(k r) normalized to 1 at the
 * sublayer's outer boundary and the outgoing part h_n(k r) normalized to 1
 * at its inner boundary. The normalization absorbs both the exp(|Im k| r)
 * growth and the (|k| r / 2n)^(+-n) order scaling, so matrix entries stay
 * O(1) at any frequency and order. The innermost sublayer keeps only the
 * regular part, the unbounded outermost sublayer only the outgoing part.
 *
 * Interface conditions at each R_i: flux continuity
 * D_i dT/dr|- = D_{i+1} dT/dr|+ and the concentration jump
 * T|- = kappa_i T|+. At the source radius the radial Green's function is
 * continuous while r^2 dg/dr jumps by -1/D_p, which reproduces the
 * free-space kernel exp(-sigma d)/(4 pi D d) in the homogeneous limit.
 *
 * The angular sum is collapsed by the Legendre addition theorem to a single
 * series over n with P_n(cos gamma); the literal (m, n) double sum is kept
 * in the test suite as an independent oracle.
 */

#include <Eigen/Dense>

#include <spherecir/medium.hpp>
#include <spherecir/specfun.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spherecir {

/// sigma = sqrt((k_deg + s) / D), principal root (Re sigma >= 0).
inline Complex sigma_laplace(double degradation_rate, double diffusion, Complex s) {
    if (!(diffusion > 0.0)) throw std::domain_error("sigma: diffusion must be positive");
    return std::sqrt((degradation_rate + s) / diffusion);
}

/// sigma for a real angular frequency omega (s = i omega).
inline Complex sigma(double degradation_rate, double diffusion, double omega) {
    return sigma_laplace(degradation_rate, diffusion, Complex(0.0, omega));
}

/// k = i sigma, the Bessel argument scale; Im k >= 0 selects the branch
/// where h_n(k r) decays at infinity.
inline Complex wavenumber(Complex sig) { return Complex(0.0, 1.0) * sig; }

/// Convergence controls for the harmonic series.
struct SeriesOptions {
    int max_order = 200;       ///< hard cap on n
    double tol = 1e-10;        ///< term magnitude threshold relative to the partial sum
    int consecutive = 3;       ///< small terms in a row required to stop
    int min_order = 8;         ///< never stop before this order
    double abs_floor = 0.0;    ///< if > 0, stop when terms AND partial sum are below this
};

/// Coefficients of one sublayer for one (n, s): f(r) = coef_j * j_n(k r)/j_n(k a_j)
/// + coef_h * h_n(k r)/h_n(k a_h), with anchors a_j (outer) and a_h (inner).
struct SublayerCoef {
    Complex coef_j{0.0};
    Complex coef_h{0.0};
    Complex anchor_j_mant{0.0};
    double anchor_j_log = 0.0;
    Complex anchor_h_mant{0.0};
    double anchor_h_log = 0.0;
};

/// Solved radial profile t_n(., s) across all sublayers.
struct RadialSolution {
    int order = 0;
    Complex s{0.0};
    std::vector<SublayerCoef> coefs;
};

/**
 * @brief Assembles, solves and evaluates the radial systems for one Laplace
 *        frequency s, caching per-order solutions and per-radius Bessel
 *        arrays. Not thread-safe; use one instance per worker.
 */
class FrequencySolver {
public:
    FrequencySolver(const LayerStack& stack, const SourceSpec& source, Complex s,
                    SeriesOptions opts = {})
        : stack_(stack), source_(source), s_(s), opts_(opts) {
        stack.validate_source(source);
        if (source.r_um <= 0.0)
            throw std::invalid_argument(
                "FrequencySolver: source at the origin is not supported; offset r0 > 0");
        source_region_ = stack.locate(source.r_um);

        // Build the sublayer list: every region once, the source region twice.
        for (std::size_t q = 0; q < stack.num_regions(); ++q) {
            double rin = stack.region_inner_radius(q);
            double rout = stack.region_outer_radius(q);
            Complex sig = sigma_laplace(stack.degradation(q), stack.diffusion(q), s);
            if (sig == Complex(0.0))
                throw std::invalid_argument(
                    "FrequencySolver: sigma = 0 (zero frequency without degradation); "
                    "evaluate at a nonzero frequency instead");
            Complex k = wavenumber(sig);
            if (q == source_region_) {
                subs_.push_back({rin, source.r_um, q, k});
                subs_.push_back({source.r_um, rout, q, k});
                source_sub_inner_ = subs_.size() - 2;
            } else {
                subs_.push_back({rin, rout, q, k});
            }
        }
        int col = 0;
        for (Sub& sub : subs_) {
            sub.has_j = std::isfinite(sub.r_out);
            sub.has_h = sub.r_in > 0.0;
            if (sub.has_j) sub.col_j = col++;
            if (sub.has_h) sub.col_h = col++;
        }
        dim_ = col;
    }

    const LayerStack& stack() const { return stack_; }
    const SourceSpec& source() const { return source_; }
    Complex laplace_s() const { return s_; }
    int dimension() const { return dim_; }
    std::size_t num_sublayers() const { return subs_.size(); }

    /// Interface/source matrix and right-hand side for order n, in the
    /// normalized basis (rows and columns are equilibrated before solving).
    struct AssembledSystem {
        Eigen::MatrixXcd matrix;
        Eigen::VectorXcd rhs;
    };

    AssembledSystem assemble(int n) {
        ensure_capacity(n);
        AssembledSystem sys;
        sys.matrix = Eigen::MatrixXcd::Zero(dim_, dim_);
        sys.rhs = Eigen::VectorXcd::Zero(dim_);
        int row = 0;
        for (std::size_t b = 0; b + 1 < subs_.size(); ++b) {
            const Sub& left = subs_[b];
            const Sub& right = subs_[b + 1];
            double rho = left.r_out;
            bool is_source_boundary = (left.region == right.region);
            if (is_source_boundary) {
                // continuity of g_n at r0
                put_basis(sys.matrix, row, left, n, false, /*deriv=*/false, -1.0);
                put_basis(sys.matrix, row, right, n, true, /*deriv=*/false, +1.0);
                ++row;
                // r^2 (dg/dr|+ - dg/dr|-) = -1/D_p
                put_basis(sys.matrix, row, left, n, false, /*deriv=*/true, -1.0);
                put_basis(sys.matrix, row, right, n, true, /*deriv=*/true, +1.0);
                sys.rhs(row) = -1.0 / (stack_.diffusion(left.region) * rho * rho);
                ++row;
            } else {
                // D_i dT/dr|- = D_{i+1} dT/dr|+
                put_basis(sys.matrix, row, left, n, false, /*deriv=*/true,
                          stack_.diffusion(left.region));
                put_basis(sys.matrix, row, right, n, true, /*deriv=*/true,
                          -stack_.diffusion(right.region));
                ++row;
                // T|- = kappa T|+
                double kappa = stack_.jump(right.region);
                put_basis(sys.matrix, row, left, n, false, /*deriv=*/false, 1.0);
                put_basis(sys.matrix, row, right, n, true, /*deriv=*/false, -kappa);
                ++row;
            }
        }
        return sys;
    }

    /// Solve (or fetch the cached) radial system of order n.
    const RadialSolution& solution(int n) {
        if (n < 0) throw std::invalid_argument("solution: order must be >= 0");
        if (static_cast<std::size_t>(n) < solutions_.size() && solutions_[n].order == n &&
            solved_[n])
            return solutions_[n];
        if (static_cast<std::size_t>(n) >= solutions_.size()) {
            solutions_.resize(n + 1);
            solved_.resize(n + 1, false);
        }

        AssembledSystem sys = assemble(n);
        // Row/column equilibration keeps the pivoted LU well scaled across
        // frequencies and orders.
        Eigen::VectorXd row_scale(dim_), col_scale(dim_);
        for (int i = 0; i < dim_; ++i) {
            double m = sys.matrix.row(i).cwiseAbs().maxCoeff();
            row_scale(i) = (m > 0.0) ? 1.0 / m : 1.0;
        }
        Eigen::MatrixXcd scaled = row_scale.asDiagonal() * sys.matrix;
        for (int jcol = 0; jcol < dim_; ++jcol) {
            double m = scaled.col(jcol).cwiseAbs().maxCoeff();
            col_scale(jcol) = (m > 0.0) ? 1.0 / m : 1.0;
        }
        scaled = scaled * col_scale.asDiagonal();

        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(scaled);
        double rc = lu.rcond();
        if (!(rc > 1e-12)) {
            std::ostringstream msg;
            msg << "solve_radial: interface system ill-conditioned (rcond = " << rc
                << ") at n = " << n << ", s = (" << s_.real() << ", " << s_.imag() << ")";
            throw std::runtime_error(msg.str());
        }
        Eigen::VectorXcd x = col_scale.asDiagonal() *
                             lu.solve(Eigen::VectorXcd(row_scale.asDiagonal() * sys.rhs));

        RadialSolution sol;
        sol.order = n;
        sol.s = s_;
        sol.coefs.resize(subs_.size());
        for (std::size_t si = 0; si < subs_.size(); ++si) {
            const Sub& sub = subs_[si];
            SublayerCoef& c = sol.coefs[si];
            if (sub.has_j) {
                c.coef_j = x(sub.col_j);
                c.anchor_j_mant = sub.j_out.val[n];
                c.anchor_j_log = sub.j_out.logs[n];
            }
            if (sub.has_h) {
                c.coef_h = x(sub.col_h);
                c.anchor_h_mant = sub.h_in.val[n];
                c.anchor_h_log = sub.h_in.logs[n];
            }
        }
        solutions_[n] = std::move(sol);
        solved_[n] = true;
        return solutions_[n];
    }

    /// Radial profile t_n(r, s): g_n in the source layer, u_n elsewhere.
    Complex radial(int n, double r) {
        const RadialSolution& sol = solution(n);
        std::size_t si = sublayer_of(r);
        const Sub& sub = subs_[si];
        const SublayerCoef& c = sol.coefs[si];
        const PointArrays& pt = point_arrays(r, sub);
        Complex f = 0.0;
        if (sub.has_j)
            f += c.coef_j * ratio(pt.j.val[n], pt.j.logs[n], c.anchor_j_mant, c.anchor_j_log);
        if (sub.has_h)
            f += c.coef_h * ratio(pt.h.val[n], pt.h.logs[n], c.anchor_h_mant, c.anchor_h_log);
        return f;
    }

    /// Radial derivative dt_n/dr at r (used by residual checks).
    Complex radial_derivative(int n, double r) {
        const RadialSolution& sol = solution(n);
        std::size_t si = sublayer_of(r);
        const Sub& sub = subs_[si];
        const SublayerCoef& c = sol.coefs[si];
        const PointArrays& pt = point_arrays(r, sub);
        Complex f = 0.0;
        if (sub.has_j)
            f += c.coef_j * sub.k *
                 ratio(pt.j.dval[n], pt.j.logs[n], c.anchor_j_mant, c.anchor_j_log);
        if (sub.has_h)
            f += c.coef_h * sub.k *
                 ratio(pt.h.dval[n], pt.h.logs[n], c.anchor_h_mant, c.anchor_h_log);
        return f;
    }

    /// Evaluate t_n at a boundary from the side of sublayer `si` (the
    /// per-sublayer representation is valid on the closed interval).
    Complex radial_from_sublayer(int n, std::size_t si, double r, bool derivative = false) {
        const RadialSolution& sol = solution(n);
        const Sub& sub = subs_[si];
        const SublayerCoef& c = sol.coefs[si];
        const PointArrays& pt = point_arrays(r, sub);
        Complex f = 0.0;
        if (sub.has_j) {
            Complex base = derivative ? pt.j.dval[n] : pt.j.val[n];
            Complex v = c.coef_j * ratio(base, pt.j.logs[n], c.anchor_j_mant, c.anchor_j_log);
            f += derivative ? sub.k * v : v;
        }
        if (sub.has_h) {
            Complex base = derivative ? pt.h.dval[n] : pt.h.val[n];
            Complex v = c.coef_h * ratio(base, pt.h.logs[n], c.anchor_h_mant, c.anchor_h_log);
            f += derivative ? sub.k * v : v;
        }
        return f;
    }

    /// Largest violation of the interface/source conditions for order n by
    /// direct back-substitution, each normalized by the largest term entering
    /// the condition (i.e. relative to the row norm, not to a possibly
    /// evanescent condition value).
    double boundary_residual(int n) {
        solution(n);
        double worst = 0.0;
        for (std::size_t b = 0; b + 1 < subs_.size(); ++b) {
            const Sub& left = subs_[b];
            const Sub& right = subs_[b + 1];
            double rho = left.r_out;
            bool is_source_boundary = (left.region == right.region);
            double sl = 0.0, sr = 0.0, sdl = 0.0, sdr = 0.0;
            Complex fl = eval_terms(n, b, rho, false, sl);
            Complex fr = eval_terms(n, b + 1, rho, false, sr);
            Complex dl = eval_terms(n, b, rho, true, sdl);
            Complex dr = eval_terms(n, b + 1, rho, true, sdr);
            if (is_source_boundary) {
                worst = std::max(worst, scaled_gap(fl - fr, std::max(sl, sr)));
                Complex want = Complex(-1.0 / stack_.diffusion(left.region));
                double scale = std::max({rho * rho * sdl, rho * rho * sdr, std::abs(want)});
                worst = std::max(worst,
                                 scaled_gap(rho * rho * (dr - dl) - want, scale));
            } else {
                double d_l = stack_.diffusion(left.region);
                double d_r = stack_.diffusion(right.region);
                worst = std::max(worst, scaled_gap(d_l * dl - d_r * dr,
                                                   std::max(d_l * sdl, d_r * sdr)));
                double kappa = stack_.jump(right.region);
                worst = std::max(worst,
                                 scaled_gap(fl - kappa * fr, std::max(sl, kappa * sr)));
            }
        }
        return worst;
    }

    /**
     * @brief Green's function G(obs | source; s), including the source time
     *        phase exp(-s t0).
     *
     * Single sum over n of (2n+1)/(4 pi) P_n(cos gamma) t_n(r), truncated
     * when `consecutive` successive terms fall below tol relative to the
     * partial sum. Throws on non-convergence, reporting the last term.
     */
    Complex greens(const ObservationPoint& obs) {
        double r = obs.r_um;
        if (r < 0.0) throw std::invalid_argument("greens: r must be >= 0");
        double cg = cos_gamma(obs, source_);
        Complex sum = 0.0;
        double p_prev = 1.0, p_curr = cg;  // P_0, P_1
        int consec = 0;
        double last_term = 0.0;
        for (int n = 0; n <= opts_.max_order; ++n) {
            double pn = (n == 0) ? 1.0 : (n == 1 ? cg : 0.0);
            if (n >= 2) {
                pn = ((2.0 * n - 1.0) * cg * p_curr - (n - 1.0) * p_prev) / n;
                p_prev = p_curr;
                p_curr = pn;
            }
            Complex term = (2.0 * n + 1.0) / (4.0 * M_PI) * pn * radial(n, r);
            sum += term;
            last_term = std::abs(term);
            bool small_rel = last_term < opts_.tol * std::abs(sum);
            // an absolute floor lets deeply attenuated high-frequency samples
            // finish early instead of chasing relative accuracy of ~0
            bool small_abs = opts_.abs_floor > 0.0 && last_term < opts_.abs_floor &&
                             std::abs(sum) < opts_.abs_floor;
            if (small_rel || small_abs)
                ++consec;
            else
                consec = 0;
            if (consec >= opts_.consecutive && n >= opts_.min_order)
                return sum * std::exp(-s_ * source_.emission_time_s);
        }
        std::ostringstream msg;
        msg << "greens: harmonic series not converged after " << opts_.max_order
            << " terms; last term magnitude " << last_term;
        throw std::runtime_error(msg.str());
    }

    /// cos of the angle between two directions given in spherical coordinates.
    static double cos_gamma(const ObservationPoint& a, const SourceSpec& b) {
        double cg = std::cos(a.theta_rad) * std::cos(b.theta_rad) +
                    std::sin(a.theta_rad) * std::sin(b.theta_rad) *
                        std::cos(a.phi_rad - b.phi_rad);
        return std::clamp(cg, -1.0, 1.0);
    }

    std::size_t source_sublayer_inner() const { return source_sub_inner_; }

    std::size_t sublayer_of(double r) const {
        std::size_t region = stack_.locate(r);
        std::size_t si = 0;
        for (; si < subs_.size(); ++si)
            if (subs_[si].region == region) break;
        if (region == source_region_ && r >= source_.r_um) ++si;
        return si;
    }

private:
    struct Sub {
        double r_in, r_out;
        std::size_t region;
        Complex k;
        bool has_j = false, has_h = false;
        int col_j = -1, col_h = -1;
        SphBesselArray j_in, j_out, h_in, h_out;
    };

    struct PointArrays {
        SphBesselArray j, h;
        int nmax = -1;
    };

    static Complex ratio(Complex mant, double log_val, Complex anchor_mant, double anchor_log) {
        return mant / anchor_mant * std::exp(log_val - anchor_log);
    }

    static double scaled_gap(Complex gap, double scale) {
        if (scale < 1e-300) return 0.0;
        return std::abs(gap) / scale;
    }

    /// Like radial_from_sublayer, additionally reporting the largest single
    /// basis-term magnitude so callers can form row-norm-relative residuals.
    Complex eval_terms(int n, std::size_t si, double r, bool derivative, double& scale) {
        const RadialSolution& sol = solution(n);
        const Sub& sub = subs_[si];
        const SublayerCoef& c = sol.coefs[si];
        const PointArrays& pt = point_arrays(r, sub);
        Complex f = 0.0;
        scale = 0.0;
        if (sub.has_j) {
            Complex base = derivative ? pt.j.dval[n] : pt.j.val[n];
            Complex v = c.coef_j * ratio(base, pt.j.logs[n], c.anchor_j_mant, c.anchor_j_log);
            if (derivative) v *= sub.k;
            f += v;
            scale = std::max(scale, std::abs(v));
        }
        if (sub.has_h) {
            Complex base = derivative ? pt.h.dval[n] : pt.h.val[n];
            Complex v = c.coef_h * ratio(base, pt.h.logs[n], c.anchor_h_mant, c.anchor_h_log);
            if (derivative) v *= sub.k;
            f += v;
            scale = std::max(scale, std::abs(v));
        }
        return f;
    }

    void ensure_capacity(int n) {
        if (n < cap_) return;
        cap_ = std::max({2 * cap_, n + 1, 16});
        for (Sub& sub : subs_) {
            if (sub.has_j) {
                sub.j_out = sph_j_array(sub.k * sub.r_out, cap_);
                if (sub.r_in > 0.0) sub.j_in = sph_j_array(sub.k * sub.r_in, cap_);
            }
            if (sub.has_h) {
                sub.h_in = sph_h_array(sub.k * sub.r_in, cap_);
                if (std::isfinite(sub.r_out)) sub.h_out = sph_h_array(sub.k * sub.r_out, cap_);
            }
        }
        points_.clear();  // point caches are rebuilt lazily at the new capacity
    }

    /// Basis entries of sublayer `sub` at its own endpoint (inner or outer).
    void put_basis(Eigen::MatrixXcd& m, int row, const Sub& sub, int n, bool at_inner,
                   bool deriv, Complex factor) {
        if (sub.has_j) {
            const SphBesselArray& arr = at_inner ? sub.j_in : sub.j_out;
            Complex base = deriv ? arr.dval[n] : arr.val[n];
            Complex v = base / sub.j_out.val[n] * std::exp(arr.logs[n] - sub.j_out.logs[n]);
            if (deriv) v *= sub.k;
            m(row, sub.col_j) += factor * v;
        }
        if (sub.has_h) {
            const SphBesselArray& arr = at_inner ? sub.h_in : sub.h_out;
            Complex base = deriv ? arr.dval[n] : arr.val[n];
            Complex v = base / sub.h_in.val[n] * std::exp(arr.logs[n] - sub.h_in.logs[n]);
            if (deriv) v *= sub.k;
            m(row, sub.col_h) += factor * v;
        }
    }

    const PointArrays& point_arrays(double r, const Sub& sub) {
        // keyed by (region, radius): k is shared within a region, but an
        // interface radius is evaluated from both sides with different k
        auto key = std::make_pair(sub.region, r);
        auto it = points_.find(key);
        if (it != points_.end() && it->second.nmax >= cap_ - 1) return it->second;
        PointArrays pa;
        pa.j = sph_j_array(sub.k * r, cap_);
        pa.h = (r > 0.0) ? sph_h_array(sub.k * r, cap_) : SphBesselArray{};
        pa.nmax = cap_ - 1;
        auto res = points_.insert_or_assign(key, std::move(pa));
        return res.first->second;
    }

    const LayerStack& stack_;
    SourceSpec source_;
    Complex s_;
    SeriesOptions opts_;
    std::size_t source_region_ = 0;
    std::size_t source_sub_inner_ = 0;
    std::vector<Sub> subs_;
    int dim_ = 0;
    int cap_ = 0;
    std::vector<RadialSolution> solutions_;
    std::vector<bool> solved_;
    std::map<std::pair<std::size_t, double>, PointArrays> points_;
};

}  // namespace spherecir

#endif  // SPHERECIR_ANALYTIC_HPP
