#pragma once

namespace fbqos {

inline constexpr double log2e = 1.4426950408889634074;
inline constexpr double ln2 = 0.69314718055994530942;
inline constexpr double pi = 3.14159265358979323846;

// Probability strictly inside (0, 1). Construction throws fbqos::domain_error.
class prob_value {
public:
    explicit prob_value(double p);
    double value() const { return p_; }
    operator double() const { return p_; }

private:
    double p_;
};

namespace specfun {

// Q(x) = P(Z > x) for a standard normal Z.
double gaussian_q(double x);

// Inverse of gaussian_q on (0, 1). Throws domain_error outside.
double gaussian_q_inv(double p);

// dQ^{-1}(y)/dy = -sqrt(2 pi) exp(Q^{-1}(y)^2 / 2).
double gaussian_q_inv_derivative(double y);

// Principal branch of the Lambert W function for y >= 0.
double lambert_w0(double y);

// Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt for any real s and x > 0.
double upper_incomplete_gamma(double s, double x);

// E|z - (sqrt(x)/2)(z^2 - 1)|^3 for standard normal z. Exact: the cubic is
// integrated piecewise between the roots with truncated normal moments.
double k_moment(double x);

// K(x) = c0 (x/(1+x))^3 E|z^2 - 2z/sqrt(x) - 1|^3, finite at x = 0.
double k_function(double x, double c0 = 1.0);

// K(x) / V(x)^{3/2} with V the AWGN dispersion. Finite at x = 0.
double k_over_dispersion_32(double x, double c0 = 1.0);

// lim_{x->inf} K(x)/V(x)^{3/2} = c0 E|z^2-1|^3 (ln 2)^3.
double k_over_dispersion_32_limit(double c0 = 1.0);

// E|z^2 - 1|^3, closed form.
double abs_chi_moment3();

}  // namespace specfun
}  // namespace fbqos
