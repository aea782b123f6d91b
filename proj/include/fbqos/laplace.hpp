#pragma once

#include "fbqos/channels.hpp"
#include "fbqos/fbc.hpp"
#include "fbqos/power.hpp"

namespace fbqos {

enum class laplace_variant { plain, truncated, arq };

std::string to_string(laplace_variant v);

struct laplace_result {
    double x_star = 0.0;      // gain minimising r above the cutoff
    double r_at_star = 0.0;   // bits per channel use
    double r2_at_star = 0.0;  // r''(x*), positive at a minimum
    double ec_value = 0.0;    // bits per slot
    double normalized = 0.0;  // ec_value / N
    laplace_variant variant = laplace_variant::plain;
};

// Gain where the received SNR reaches the rate minimiser u*; closed form for
// the built-in policies, bisection for custom ones. Custom policies must be
// admissible (Xi(x) x nondecreasing) on a log grid around x*.
double solve_x_star(const power_policy& policy, const fbc_params& params);

// g'(x) = -r'(x); vanishes at x*.
double stationarity_residual(double x, const power_policy& policy, const fbc_params& params);

// alpha_S ~ N r* - [ln f(x*) + ln(2 pi)/2 - ln r''(x*)/2 - ln(theta N T)/2] / (theta T).
// Throws precondition_error for point-mass channels, f(x*) = 0 or r''(x*) <= 0.
laplace_result ec_laplace(const channel_model& model, const power_policy& policy,
                          const fbc_params& params, double theta);

// Whether the truncated form divides by theta T (consistent with the plain
// form) or by theta N, the other normalization in use for this formula.
enum class truncated_prefactor { per_frame, printed };

// Adds the mass below the policy cutoff, xi = e^{-theta N T r0} F(h_th) with
// r0 the below-cutoff rate, to the Laplace integral before taking logs.
laplace_result ec_laplace_truncated(
    const channel_model& model, const power_policy& policy, const fbc_params& params, double theta,
    truncated_prefactor prefactor = truncated_prefactor::per_frame,
    zero_power_rate below_cutoff = zero_power_rate::half_log2_blocklength);

// Simple ARQ: -(1/(theta T)) ln(e + (1 - e) * Laplace integral). The failure
// probability e defaults to params.epsilon; passing 0 reproduces ec_laplace
// exactly.
laplace_result ec_laplace_arq(const channel_model& model, const power_policy& policy,
                              const fbc_params& params, double theta, double failure_probability);
laplace_result ec_laplace_arq(const channel_model& model, const power_policy& policy,
                              const fbc_params& params, double theta);

}  // namespace fbqos
