#include "fbqos/fbc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "fbqos/error.hpp"
#include "fbqos/specfun.hpp"

namespace fbqos {

void fbc_params::validate() const {
    if (!(blocklength >= 1.0 && std::isfinite(blocklength)))
        throw domain_error("fbc: blocklength must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 0.5))
        throw domain_error("fbc: error probability must lie in (0, 0.5]");
    if (!(snr > 0.0 && std::isfinite(snr))) throw domain_error("fbc: SNR must be positive");
}

double fbc_params::q_inv() const { return epsilon == 0.5 ? 0.0 : specfun::gaussian_q_inv(epsilon); }

double fbc_params::ell() const {
    double q = q_inv();
    return q * q / blocklength;
}

double dispersion(double snr_eff) {
    if (!(snr_eff >= 0.0)) throw domain_error("dispersion: SNR must be >= 0");
    if (std::isinf(snr_eff)) return log2e * log2e;
    // 1 - (1+s)^{-2} = s (2+s) / (1+s)^2
    double t = 1.0 + snr_eff;
    return log2e * log2e * (snr_eff / t) * ((2.0 + snr_eff) / t);
}

rate_value normal_approx_rate(const fbc_params& params, double gain) {
    params.validate();
    if (!(gain >= 0.0)) throw domain_error("normal_approx_rate: gain must be >= 0");
    double n = params.blocklength;
    double s = gain * params.snr;
    rate_value v;
    v.total_bits = n * std::log2(1.0 + s) - std::sqrt(n * dispersion(s)) * params.q_inv() +
                   0.5 * std::log2(n);
    v.bits_per_channel_use = v.total_bits / n;
    return v;
}

rate_derivatives rate_of_received_snr(double u, const fbc_params& params) {
    if (!(u >= 0.0)) throw domain_error("rate: received SNR must be >= 0");
    double n = params.blocklength;
    double sl = std::sqrt(params.ell());
    double t = 1.0 + u;
    double w = std::sqrt(u) * std::sqrt(2.0 + u);  // sqrt(t^2 - 1)
    rate_derivatives d;
    d.r = std::log1p(u) * log2e - sl * log2e * w / t + 0.5 * std::log2(n) / n;
    if (u == 0.0) {
        d.dr = sl > 0.0 ? -std::numeric_limits<double>::infinity() : log2e;
        d.d2r = sl > 0.0 ? std::numeric_limits<double>::infinity() : -log2e;
        return d;
    }
    d.dr = log2e * (1.0 / t - sl / t / t / w);
    d.d2r = log2e * (-1.0 / (t * t) + sl * (3.0 - 2.0 / (t * t)) / t / w / w / w);
    return d;
}

double rate_function_r(double x, const power_policy& policy, const fbc_params& params,
                       zero_power_rate below_cutoff) {
    if (!(x >= 0.0)) throw domain_error("rate_function_r: gain must be >= 0");
    double c = policy.cutoff();
    if (c > 0.0 && x <= c) {
        if (below_cutoff == zero_power_rate::zero) return 0.0;
        return 0.5 * std::log2(params.blocklength) / params.blocklength;
    }
    double u = policy.received_snr(x).u;
    return rate_of_received_snr(std::max(u, 0.0), params).r;
}

rate_derivatives rate_function_derivatives(double x, const power_policy& policy,
                                           const fbc_params& params) {
    snr_derivatives u = policy.received_snr(x);
    rate_derivatives h = rate_of_received_snr(std::max(u.u, 0.0), params);
    rate_derivatives d;
    d.r = h.r;
    d.dr = h.dr * u.du;
    d.d2r = h.d2r * u.du * u.du + h.dr * u.d2u;
    return d;
}

double optimal_received_snr(const fbc_params& params) {
    double ell = params.ell();
    // t^2 - 1 = (sqrt(1+4 ell) - 1)/2 = s/2, written without cancellation.
    double s = 4.0 * ell / (std::sqrt(1.0 + 4.0 * ell) + 1.0);
    return 0.5 * s / (std::sqrt(1.0 + 0.5 * s) + 1.0);
}

g_bounds_result g_bounds(const fbc_params& params, double gain, double c0, double c2) {
    params.validate();
    if (!(c2 > 0.0)) throw domain_error("g_bounds: c2 must be > 0");
    double s = gain * params.snr;
    if (!(s > 0.0)) throw domain_error("g_bounds: received SNR must be > 0");
    const double n = params.blocklength, eps = params.epsilon;
    const double v = dispersion(s);
    const double k = specfun::k_function(s, c0);
    const double kv = specfun::k_over_dispersion_32(s, c0);

    double n_upper = std::pow(2.0 * kv / (1.0 - eps), 2);
    double n_lower = std::pow(2.0 * kv / eps, 2);
    if (!(n > n_upper) || !(n > n_lower)) {
        std::ostringstream msg;
        msg << "g_bounds: blocklength " << n << " below validity threshold";
        if (!(n > n_upper)) msg << " (upper bound needs N > " << n_upper << ")";
        if (!(n > n_lower)) msg << " (lower bound needs N > " << n_lower << ")";
        throw precondition_error(msg.str());
    }

    g_bounds_result out;
    out.b1 = 2.0 * kv / std::sqrt(std::pow(2.0 * kv / (1.0 - eps), 2) + 1.0);
    double y_lo = 1.0 - eps - out.b1, y_hi = 1.0 - eps;
    if (!(y_lo > 0.0)) throw precondition_error("g_bounds: 1 - eps - b1 must be positive");
    // dQ^{-1}/dy is smooth and monotone in |Q^{-1}| here; a dense grid is enough.
    double dmin = std::numeric_limits<double>::infinity();
    constexpr int grid = 10000;
    for (int i = 0; i <= grid; ++i) {
        double y = y_lo + (y_hi - y_lo) * double(i) / grid;
        dmin = std::min(dmin, specfun::gaussian_q_inv_derivative(y));
    }
    out.c1 = -2.0 * k * dmin;
    out.upper = out.c1 / v + 1.5 * std::log2(v) - std::log2(k);

    double shift = 2.0 * kv / std::sqrt(n);
    out.lower = -0.5 * std::log2(n) + std::log2(kv / c2) -
                std::log2(2.0 * (ln2 / std::sqrt(2.0 * pi) + 2.0 * kv)) +
                std::sqrt(n * v) * (specfun::gaussian_q_inv(1.0 - eps + shift) + params.q_inv());
    return out;
}

}  // namespace fbqos
