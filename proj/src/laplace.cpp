#include "fbqos/laplace.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"
#include "fbqos/specfun.hpp"

namespace fbqos {

std::string to_string(laplace_variant v) {
    switch (v) {
        case laplace_variant::plain: return "laplace";
        case laplace_variant::truncated: return "laplace_truncated";
        case laplace_variant::arq: return "laplace_arq";
    }
    return "unknown";
}

double solve_x_star(const power_policy& policy, const fbc_params& params) {
    params.validate();
    double u = optimal_received_snr(params);
    if (policy.kind() == policy_kind::fixed) return u / policy.snr();
    double x = policy.invert_received_snr(u);
    if (policy.kind() == policy_kind::custom) {
        double lo = std::max(x, 1e-12) * 1e-3;
        auto grid = numeric::logspace(lo, lo * 1e6, 121);
        admissibility_report rep = check_admissible(policy, grid);
        if (!rep.admissible) {
            std::ostringstream msg;
            msg << "solve_x_star: policy '" << policy.name()
                << "' is not admissible near x = " << *rep.first_violation;
            throw precondition_error(msg.str());
        }
    }
    return x;
}

double stationarity_residual(double x, const power_policy& policy, const fbc_params& params) {
    return -rate_function_derivatives(x, policy, params).dr;
}

namespace {

struct laplace_core {
    laplace_result res;
    double log_integral = 0.0;  // ln of sqrt(2 pi/(lambda r'')) f(x*) e^{-lambda r*}
    double lambda = 0.0;
};

laplace_core laplace_common(const channel_model& model, const power_policy& policy,
                            const fbc_params& params, double theta) {
    model.validate();
    params.validate();
    if (!(theta > 0.0)) throw domain_error("ec_laplace: theta must be > 0");
    if (!model.continuous())
        throw precondition_error("ec_laplace: channel gain is a point mass; use the exact EC");
    laplace_core c;
    c.res.x_star = solve_x_star(policy, params);
    double f = pdf(model, c.res.x_star);
    if (!(f > 0.0) || !std::isfinite(f)) {
        std::ostringstream msg;
        msg << "ec_laplace: density at x* = " << c.res.x_star << " is " << f;
        throw precondition_error(msg.str());
    }
    rate_derivatives d = rate_function_derivatives(c.res.x_star, policy, params);
    if (!(d.d2r > 0.0) || !std::isfinite(d.d2r)) {
        std::ostringstream msg;
        msg << "ec_laplace: curvature r''(x*) = " << d.d2r << " is not positive and finite";
        throw precondition_error(msg.str());
    }
    c.res.r_at_star = d.r;
    c.res.r2_at_star = d.d2r;
    c.lambda = theta * params.blocklength * model.frame_slots;
    c.log_integral = -c.lambda * d.r + std::log(f) + 0.5 * std::log(2.0 * pi) -
                     0.5 * std::log(d.d2r) - 0.5 * std::log(c.lambda);
    return c;
}

void finish(laplace_result& r, double log_mgf, double denom, double blocklength) {
    r.ec_value = -log_mgf / denom;
    r.normalized = r.ec_value / blocklength;
}

}  // namespace

laplace_result ec_laplace(const channel_model& model, const power_policy& policy,
                          const fbc_params& params, double theta) {
    laplace_core c = laplace_common(model, policy, params, theta);
    c.res.variant = laplace_variant::plain;
    finish(c.res, c.log_integral, theta * model.frame_slots, params.blocklength);
    return c.res;
}

laplace_result ec_laplace_truncated(const channel_model& model, const power_policy& policy,
                                    const fbc_params& params, double theta,
                                    truncated_prefactor prefactor, zero_power_rate below_cutoff) {
    laplace_core c = laplace_common(model, policy, params, theta);
    c.res.variant = laplace_variant::truncated;
    double l = c.log_integral;
    double cut = policy.cutoff();
    if (cut > 0.0) {
        double r0 = below_cutoff == zero_power_rate::zero
                        ? 0.0
                        : 0.5 * std::log2(params.blocklength) / params.blocklength;
        double mass = cdf(model, cut);
        if (mass > 0.0) l = numeric::log_add_exp(std::log(mass) - c.lambda * r0, l);
    }
    double denom = prefactor == truncated_prefactor::per_frame ? theta * model.frame_slots
                                                               : theta * params.blocklength;
    finish(c.res, l, denom, params.blocklength);
    return c.res;
}

laplace_result ec_laplace_arq(const channel_model& model, const power_policy& policy,
                              const fbc_params& params, double theta, double failure_probability) {
    if (!(failure_probability >= 0.0 && failure_probability < 1.0))
        throw domain_error("ec_laplace_arq: failure probability must lie in [0, 1)");
    laplace_core c = laplace_common(model, policy, params, theta);
    c.res.variant = laplace_variant::arq;
    double log_eps = failure_probability > 0.0 ? std::log(failure_probability)
                                               : -std::numeric_limits<double>::infinity();
    double l = numeric::log_add_exp(log_eps, std::log1p(-failure_probability) + c.log_integral);
    finish(c.res, l, theta * model.frame_slots, params.blocklength);
    return c.res;
}

laplace_result ec_laplace_arq(const channel_model& model, const power_policy& policy,
                              const fbc_params& params, double theta) {
    return ec_laplace_arq(model, policy, params, theta, params.epsilon);
}

}  // namespace fbqos
