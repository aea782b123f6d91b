#pragma once

#include "fbqos/power.hpp"

namespace fbqos {

// Blocklength N (channel uses, >= 1; a double so sweeps can scale it),
// error probability in (0, 0.5] and transmit SNR (linear). The SNR is only
// used by normal_approx_rate; rate_function_r takes its power from a policy.
struct fbc_params {
    double blocklength = 1.0;
    double epsilon = 0.5;
    double snr = 1.0;

    void validate() const;
    double q_inv() const;  // Q^{-1}(epsilon)
    double ell() const;    // (Q^{-1}(epsilon) / sqrt(N))^2
};

struct rate_value {
    double bits_per_channel_use = 0.0;
    double total_bits = 0.0;
};

// Rate assigned where no power is transmitted (below a policy cutoff).
enum class zero_power_rate { half_log2_blocklength, zero };

// V(s) = (log2 e)^2 (1 - (1+s)^{-2}).
double dispersion(double snr_eff);

// N log2(1 + g gamma) - sqrt(N V(g gamma)) Q^{-1}(eps) + log2(N)/2.
rate_value normal_approx_rate(const fbc_params& params, double gain);

// Per-use rate as a function of the received SNR u, with its u-derivatives.
// h(u) = log2(1+u) - sqrt(ell (1 - (1+u)^{-2})) log2 e + log2(N)/(2N).
struct rate_derivatives {
    double r = 0.0;
    double dr = 0.0;
    double d2r = 0.0;
};
rate_derivatives rate_of_received_snr(double u, const fbc_params& params);

// r(x) for gain x under a power policy.
double rate_function_r(double x, const power_policy& policy, const fbc_params& params,
                       zero_power_rate below_cutoff = zero_power_rate::half_log2_blocklength);

// r, r', r'' in x (chain rule through u(x) = Xi(x) x). Only meaningful where
// the policy transmits.
rate_derivatives rate_function_derivatives(double x, const power_policy& policy,
                                           const fbc_params& params);

// The received SNR u* minimising h(u): (1+u)^2 ((1+u)^2 - 1) = ell.
double optimal_received_snr(const fbc_params& params);

struct g_bounds_result {
    double lower = 0.0;
    double upper = 0.0;
    double c1 = 0.0;
    double b1 = 0.0;
};

// Lower and upper bounds of the finite-blocklength remainder G at received
// SNR gain*snr. Throws precondition_error when N is below either validity
// threshold (2K/(eps V^{3/2}))^2 or (2K/((1-eps) V^{3/2}))^2.
g_bounds_result g_bounds(const fbc_params& params, double gain, double c0 = 1.0, double c2 = 1.0);

}  // namespace fbqos
