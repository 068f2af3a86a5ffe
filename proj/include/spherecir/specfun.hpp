#ifndef SPHERECIR_SPECFUN_HPP
#define SPHERECIR_SPECFUN_HPP

/**
 * @file specfun.hpp
 * @brief Complex-argument spherical Bessel/Hankel functions and associated
 *        Legendre functions.
 *
 * The radial kernels of the layered-sphere solver are j_n(z), y_n(z) and
 * h_n(z) = j_n(z) + i y_n(z) evaluated at z = k r with k on or near the
 * positive imaginary axis, where the functions grow or decay like
 * exp(|Im z|) and additionally like (|z|/2n)^(+-n) in the order. All array
 * routines therefore return values in mantissa/log form,
 *
 *   f_n(z) = val[n] * exp(logs[n]),
 *
 * which stays representable for |z| up to thousands and n up to several
 * hundred. The solver consumes ratios of these quantities, so the exponent
 * only ever enters as a difference.
 *
 * Recurrence directions: j_n by downward (Miller) recurrence normalized
 * against the closed-form j_0/j_1 whenever the order reaches past |z|,
 * upward otherwise; y_n and h_n always upward (they grow with n).
 *
 * Legendre convention: Condon-Shortley phase EXCLUDED, i.e.
 * P_1^1(x) = sqrt(1 - x^2).
 */

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace spherecir {

using Complex = std::complex<double>;

/// Spherical Bessel family evaluated for orders 0..nmax in mantissa/log form.
/// value:      f_n(z)  = val[n]  * exp(logs[n])
/// derivative: f_n'(z) = dval[n] * exp(logs[n])
struct SphBesselArray {
    std::vector<Complex> val;
    std::vector<Complex> dval;
    std::vector<double> logs;

    Complex unscaled(int n) const {
        double l = logs[static_cast<std::size_t>(n)];
        if (l > 700.0)
            throw std::range_error("spherical Bessel value overflows double range");
        return val[static_cast<std::size_t>(n)] * std::exp(l);
    }
    Complex unscaled_derivative(int n) const {
        double l = logs[static_cast<std::size_t>(n)];
        if (l > 700.0)
            throw std::range_error("spherical Bessel derivative overflows double range");
        return dval[static_cast<std::size_t>(n)] * std::exp(l);
    }
};

namespace detail {

inline void check_finite(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("specfun: non-finite argument");
}

/// Renormalize (m, L) so that |m| is O(1).
inline void renorm(Complex& m, double& extra_log) {
    double a = std::max(std::abs(m.real()), std::abs(m.imag()));
    if (a > 0.0 && std::isfinite(a)) {
        double s = std::log(a);
        m *= std::exp(-s);
        extra_log += s;
    }
}

/// sin(z) * exp(-|Im z|) and cos(z) * exp(-|Im z|), overflow-free.
inline void scaled_sincos(Complex z, Complex& sin_s, Complex& cos_s) {
    double a = z.real(), b = z.imag(), ab = std::abs(b);
    // e^{iz} e^{|b|-...}: both factors below have magnitude <= 1.
    Complex ep = std::exp(Complex(-b - ab, a));   // e^{iz - |b|}
    Complex em = std::exp(Complex(b - ab, -a));   // e^{-iz - |b|}
    sin_s = (ep - em) / Complex(0.0, 2.0);
    cos_s = (ep + em) * 0.5;
}

/// Upward three-term recurrence from scaled seeds (f0, f1) at scale log0.
inline SphBesselArray upward_family(Complex z, int nmax, Complex f0, Complex f1, double log0) {
    SphBesselArray out;
    std::size_t count = static_cast<std::size_t>(nmax) + 1;
    out.val.resize(count);
    out.dval.resize(count);
    out.logs.resize(count);

    Complex m0 = f0, m1 = f1;
    double l0 = log0, l1 = log0;
    renorm(m0, l0);
    renorm(m1, l1);
    out.val[0] = m0;
    out.logs[0] = l0;
    out.dval[0] = -m1 * std::exp(l1 - l0);  // f_0' = -f_1
    if (nmax >= 1) {
        out.val[1] = m1;
        out.logs[1] = l1;
        out.dval[1] = m0 * std::exp(l0 - l1) - (2.0 / z) * m1;
    }
    for (int n = 1; n < nmax; ++n) {
        Complex prev = m0 * std::exp(l0 - l1);
        Complex next = (2.0 * n + 1.0) / z * m1 - prev;
        double ln = l1;
        renorm(next, ln);
        m0 = m1;
        l0 = l1;
        m1 = next;
        l1 = ln;
        std::size_t idx = static_cast<std::size_t>(n) + 1;
        out.val[idx] = m1;
        out.logs[idx] = l1;
        out.dval[idx] = m0 * std::exp(l0 - l1) - (n + 2.0) / z * m1;
    }
    return out;
}

}  // namespace detail

/// j_n(z) for n = 0..nmax in mantissa/log form.
inline SphBesselArray sph_j_array(Complex z, int nmax) {
    detail::check_finite(z);
    if (nmax < 0) throw std::invalid_argument("sph_j_array: nmax must be >= 0");
    std::size_t count = static_cast<std::size_t>(nmax) + 1;
    double az = std::abs(z);

    if (az == 0.0) {
        SphBesselArray out;
        out.val.assign(count, Complex(0.0));
        out.dval.assign(count, Complex(0.0));
        out.logs.assign(count, 0.0);
        out.val[0] = 1.0;  // j_0(0) = 1
        if (nmax >= 1) out.dval[1] = 1.0 / 3.0;
        return out;
    }

    Complex sin_s, cos_s;
    detail::scaled_sincos(z, sin_s, cos_s);
    double log0 = std::abs(z.imag());
    Complex j0 = sin_s / z;
    Complex j1 = sin_s / (z * z) - cos_s / z;

    if (static_cast<double>(nmax) <= az)
        return detail::upward_family(z, nmax, j0, j1, log0);

    // Downward Miller recurrence, normalized against the closed-form seed.
    int start = nmax + 30 + static_cast<int>(az);
    Complex fm = 0.0, fn = 1.0;  // orders start+1, start
    double lm = 0.0, ln = 0.0;
    std::vector<Complex> mant(count);
    std::vector<double> lgs(count);
    std::vector<Complex> dmant(count);
    for (int m = start; m >= 0; --m) {
        Complex prev = (2.0 * m + 3.0) / z * fn - fm * std::exp(lm - ln);
        double lp = ln;
        detail::renorm(prev, lp);
        if (m + 1 <= nmax) {
            // derivative of order m+1 uses orders m and m+2
            std::size_t idx = static_cast<std::size_t>(m) + 1;
            dmant[idx] = prev * std::exp(lp - lgs[idx]) -
                         (m + 2.0) / z * mant[idx];
        }
        fm = fn;
        lm = ln;
        fn = prev;
        ln = lp;
        if (m <= nmax) {
            mant[static_cast<std::size_t>(m)] = fn;
            lgs[static_cast<std::size_t>(m)] = ln;
        }
    }
    // Normalize by whichever seed is better conditioned.
    bool use0 = std::abs(j0) >= std::abs(j1) || nmax < 1;
    Complex ref_true = use0 ? j0 : j1;
    Complex ref_mill = mant[use0 ? 0 : 1];
    double ref_log = lgs[use0 ? 0 : 1];
    if (ref_mill == Complex(0.0))
        throw std::range_error("sph_j_array: Miller normalization failed");
    Complex ratio_m = ref_true / ref_mill;
    double ratio_l = log0 - ref_log;
    detail::renorm(ratio_m, ratio_l);

    SphBesselArray out;
    out.val.resize(count);
    out.dval.resize(count);
    out.logs.resize(count);
    for (std::size_t n = 0; n < count; ++n) {
        Complex v = mant[n] * ratio_m;
        Complex d = dmant[n] * ratio_m;
        double l = lgs[n] + ratio_l;
        detail::renorm(v, l);
        // keep dval at the same scale as val
        double dl = lgs[n] + ratio_l - l;
        out.val[n] = v;
        out.dval[n] = d * std::exp(dl);
        out.logs[n] = l;
    }
    // d_0 from the exact relation j_0' = -j_1
    out.dval[0] = (nmax >= 1)
                      ? -out.val[1] * std::exp(out.logs[1] - out.logs[0])
                      : cos_s / z * std::exp(log0 - out.logs[0]) -
                            out.val[0] / z;
    if (nmax >= 1)
        out.dval[1] = out.val[0] * std::exp(out.logs[0] - out.logs[1]) -
                      (2.0 / z) * out.val[1];
    return out;
}

/// y_n(z) for n = 0..nmax in mantissa/log form.
inline SphBesselArray sph_y_array(Complex z, int nmax) {
    detail::check_finite(z);
    if (nmax < 0) throw std::invalid_argument("sph_y_array: nmax must be >= 0");
    if (std::abs(z) == 0.0)
        throw std::domain_error("sph_y_array: y_n is singular at z = 0");
    Complex sin_s, cos_s;
    detail::scaled_sincos(z, sin_s, cos_s);
    double log0 = std::abs(z.imag());
    Complex y0 = -cos_s / z;
    Complex y1 = -cos_s / (z * z) - sin_s / z;
    return detail::upward_family(z, nmax, y0, y1, log0);
}

/// h_n(z) = j_n(z) + i y_n(z) for n = 0..nmax in mantissa/log form.
/// Decays as exp(-Im z) for Im z > 0 (the bounded-at-infinity branch).
inline SphBesselArray sph_h_array(Complex z, int nmax) {
    detail::check_finite(z);
    if (nmax < 0) throw std::invalid_argument("sph_h_array: nmax must be >= 0");
    if (std::abs(z) == 0.0)
        throw std::domain_error("sph_h_array: h_n is singular at z = 0");
    // h_0 = -i e^{iz} / z, h_1 = -e^{iz} (z + i) / z^2, scaled by e^{+Im z}.
    Complex phase = std::exp(Complex(0.0, z.real()));  // e^{iz} e^{Im z}
    Complex h0 = Complex(0.0, -1.0) * phase / z;
    Complex h1 = -phase * (z + Complex(0.0, 1.0)) / (z * z);
    return detail::upward_family(z, nmax, h0, h1, -z.imag());
}

// Scalar convenience wrappers (unscaled; throw std::range_error on overflow).

inline Complex spherical_j(int n, Complex z) { return sph_j_array(z, n).unscaled(n); }
inline Complex spherical_y(int n, Complex z) { return sph_y_array(z, n).unscaled(n); }
inline Complex spherical_h(int n, Complex z) { return sph_h_array(z, n).unscaled(n); }
inline Complex spherical_j_derivative(int n, Complex z) {
    return sph_j_array(z, n).unscaled_derivative(n);
}
inline Complex spherical_y_derivative(int n, Complex z) {
    return sph_y_array(z, n).unscaled_derivative(n);
}
inline Complex spherical_h_derivative(int n, Complex z) {
    return sph_h_array(z, n).unscaled_derivative(n);
}

/**
 * @brief Associated Legendre function P_n^m(x) without the Condon-Shortley
 *        phase, so P_1^1(x) = sqrt(1 - x^2).
 *
 * The angular sums of the Green's function use squared-symmetric products
 * P_n^m(cos theta) P_n^m(cos theta_0), which are phase-convention invariant.
 */
inline double legendre_p(int n, int m, double x) {
    if (n < 0 || m < 0 || m > n)
        throw std::invalid_argument("legendre_p: require 0 <= m <= n");
    if (x < -1.0 || x > 1.0)
        throw std::domain_error("legendre_p: require |x| <= 1");
    // P_m^m = (2m-1)!! (1-x^2)^{m/2}
    double pmm = 1.0;
    if (m > 0) {
        double s = std::sqrt((1.0 - x) * (1.0 + x));
        double fact = 1.0;
        for (int i = 0; i < m; ++i) {
            pmm *= fact * s;
            fact += 2.0;
        }
    }
    if (n == m) return pmm;
    double pmm1 = x * (2.0 * m + 1.0) * pmm;  // P_{m+1}^m
    if (n == m + 1) return pmm1;
    double p = 0.0;
    for (int l = m + 2; l <= n; ++l) {
        p = ((2.0 * l - 1.0) * x * pmm1 - (l + m - 1.0) * pmm) / (l - m);
        pmm = pmm1;
        pmm1 = p;
    }
    return p;
}

/// Legendre polynomials P_0(x)..P_nmax(x).
inline std::vector<double> legendre_p_all(int nmax, double x) {
    if (nmax < 0) throw std::invalid_argument("legendre_p_all: nmax must be >= 0");
    if (x < -1.0 || x > 1.0)
        throw std::domain_error("legendre_p_all: require |x| <= 1");
    std::vector<double> p(static_cast<std::size_t>(nmax) + 1);
    p[0] = 1.0;
    if (nmax >= 1) p[1] = x;
    for (int n = 1; n < nmax; ++n)
        p[static_cast<std::size_t>(n) + 1] =
            ((2.0 * n + 1.0) * x * p[static_cast<std::size_t>(n)] -
             n * p[static_cast<std::size_t>(n) - 1]) /
            (n + 1.0);
    return p;
}

}  // namespace spherecir

#endif  // SPHERECIR_SPECFUN_HPP
