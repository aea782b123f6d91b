#include "fbqos/specfun.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fbqos/error.hpp"

namespace fbqos {

prob_value::prob_value(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("probability must lie in (0, 1), got " + std::to_string(p));
}

namespace specfun {
namespace {

constexpr double sqrt2 = 1.41421356237309504880;
constexpr double sqrt2pi = 2.50662827463100050242;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / sqrt2pi; }

// Acklam's rational approximation to the lower-tail normal quantile,
// relative error about 1e-9 before refinement.
double acklam_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// int_l^u z^k phi(z) dz for k = 0..6 by J_k = (k-1) J_{k-2} + [-z^{k-1} phi(z)]_l^u.
// Infinite ends are passed as +-inf and contribute nothing to the bracket.
std::array<double, 7> truncated_normal_moments(double l, double u) {
    auto boundary = [](double z, int k) {
        if (std::isinf(z)) return 0.0;
        return std::pow(z, k) * normal_pdf(z);
    };
    std::array<double, 7> j{};
    // Phi(u) - Phi(l) through Q to keep tails accurate.
    j[0] = specfun::gaussian_q(l) - specfun::gaussian_q(u);
    j[1] = boundary(l, 0) - boundary(u, 0);
    for (int k = 2; k <= 6; ++k) j[k] = (k - 1) * j[k - 2] + boundary(l, k - 1) - boundary(u, k - 1);
    return j;
}

// Continued fraction for Gamma(s, x), modified Lentz. Good for x >= 1.
double upper_gamma_cf(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(s * std::log(x) - x) * h;
}

}  // namespace

double gaussian_q(double x) { return 0.5 * std::erfc(x / sqrt2); }

double gaussian_q_inv(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("gaussian_q_inv: argument must lie in (0, 1), got " +
                           std::to_string(p));
    if (p > 0.5) return -gaussian_q_inv(1.0 - p);
    if (p == 0.5) return 0.0;
    double x = -acklam_quantile(p);
    // Halley steps on Q(x) - p from the Acklam start.
    for (int i = 0; i < 3; ++i) {
        double e = gaussian_q(x) - p;
        double u = e / normal_pdf(x);
        x += u / (1.0 - 0.5 * x * u);
    }
    return x;
}

double gaussian_q_inv_derivative(double y) {
    double q = gaussian_q_inv(y);
    return -sqrt2pi * std::exp(0.5 * q * q);
}

double lambert_w0(double y) {
    if (!(y >= 0.0)) throw domain_error("lambert_w0: argument must be >= 0");
    if (y == 0.0) return 0.0;
    if (std::isinf(y)) return y;
    double w;
    if (y < 3.0) {
        w = std::log1p(y);
        w = w * (1.0 - std::log1p(w) / (2.0 + w));
    } else {
        double l1 = std::log(y);
        double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    // Halley on t(w) = w - y e^{-w}, which is w e^w - y scaled by e^{-w}.
    for (int i = 0; i < 64; ++i) {
        double ew = std::exp(-w);
        double t = w - y * ew;
        double step = t / ((w + 1.0) - (w + 2.0) * t / (2.0 * w + 2.0));
        w -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

double upper_incomplete_gamma(double s, double x) {
    if (!(x > 0.0)) throw domain_error("upper_incomplete_gamma: x must be > 0");
    if (s > 0.0) return boost::math::tgamma(s, x);
    if (x >= 1.0) return upper_gamma_cf(s, x);
    // Downward recurrence Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a from a
    // start in (0, 1], or from E1 when s is an integer.
    double k = std::ceil(-s);
    double s0 = s + k;
    double g;
    if (s0 == 0.0) {
        g = boost::math::expint(1, x);
    } else {
        g = boost::math::tgamma(s0, x);
    }
    for (double a = s0 - 1.0; a >= s - 0.5; a -= 1.0) {
        g = (g - std::exp(a * std::log(x) - x)) / a;
    }
    return g;
}

double k_moment(double x) {
    if (!(x >= 0.0)) throw domain_error("k_moment: x must be >= 0");
    if (std::isinf(x)) throw domain_error("k_moment: x must be finite");
    double a = 0.5 * std::sqrt(x);
    if (a == 0.0) return 2.0 * std::sqrt(2.0 / pi);  // E|z|^3
    // p(z) = -a z^2 + z + a is positive between its roots and negative
    // outside, so E|p|^3 = -E p^3 + 2 int_{r-}^{r+} p^3 phi.
    std::array<double, 3> p{a, 1.0, -a};
    std::array<double, 7> p3{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) p3[i + j + k] += p[i] * p[j] * p[k];
    double d = std::sqrt(1.0 + 4.0 * a * a);
    double r_plus = (1.0 + d) / (2.0 * a);
    double r_minus = -2.0 * a / (1.0 + d);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::array<double, 7> full = truncated_normal_moments(-inf, inf);
    std::array<double, 7> mid = truncated_normal_moments(r_minus, r_plus);
    double e_full = 0.0, e_mid = 0.0;
    for (int k = 0; k <= 6; ++k) {
        e_full += p3[k] * full[k];
        e_mid += p3[k] * mid[k];
    }
    return -e_full + 2.0 * e_mid;
}

double k_function(double x, double c0) {
    if (!(x >= 0.0)) throw domain_error("k_function: x must be >= 0");
    if (!(c0 > 0.0)) throw domain_error("k_function: c0 must be > 0");
    if (x == 0.0) return 0.0;
    // (x/(1+x))^3 E|z^2 - 2z/sqrt(x) - 1|^3 = 8 x^{3/2} (1+x)^{-3} E|z - (sqrt(x)/2)(z^2-1)|^3
    double r = x / (1.0 + x);
    return c0 * 8.0 * r * r * r / std::pow(x, 1.5) * k_moment(x);
}

double k_over_dispersion_32(double x, double c0) {
    if (!(x >= 0.0)) throw domain_error("k_over_dispersion_32: x must be >= 0");
    if (!(c0 > 0.0)) throw domain_error("k_over_dispersion_32: c0 must be > 0");
    if (std::isinf(x)) return k_over_dispersion_32_limit(c0);
    return c0 * 8.0 * k_moment(x) / (log2e * log2e * log2e * std::pow(2.0 + x, 1.5));
}

double k_over_dispersion_32_limit(double c0) { return c0 * abs_chi_moment3() * ln2 * ln2 * ln2; }

double abs_chi_moment3() {
    // E(z^2-1)^3 = 8 over the whole line; inside |z| < 1 the cube is negative,
    // so E|z^2-1|^3 = 8 + 2 int_{-1}^{1} (1-z^2)^3 phi(z) dz, with truncated
    // moments from integration by parts.
    double phi1 = normal_pdf(1.0);
    double m0 = std::erf(1.0 / sqrt2);
    double m2 = m0 - 2.0 * phi1;
    double m4 = 3.0 * m2 - 2.0 * phi1;
    double m6 = 5.0 * m4 - 2.0 * phi1;
    return 8.0 + 2.0 * (m0 - 3.0 * m2 + 3.0 * m4 - m6);
}

}  // namespace specfun
}  // namespace fbqos
