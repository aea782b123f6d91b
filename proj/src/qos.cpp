#include "fbqos/qos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"
#include "fbqos/specfun.hpp"

namespace fbqos {

std::string to_string(arrival_kind k) {
    switch (k) {
        case arrival_kind::deterministic: return "deterministic";
        case arrival_kind::bernoulli_packet: return "bernoulli_packet";
        case arrival_kind::poisson_bits: return "poisson_bits";
    }
    return "unknown";
}

std::string to_string(ec_method m) {
    switch (m) {
        case ec_method::quadrature: return "quadrature";
        case ec_method::monte_carlo: return "mc";
        case ec_method::laplace: return "laplace";
    }
    return "unknown";
}

arrival_process arrival_process::deterministic(double bits_per_slot) {
    arrival_process a;
    a.kind = arrival_kind::deterministic;
    a.bits = bits_per_slot;
    a.validate();
    return a;
}

arrival_process arrival_process::bernoulli_packet(double packet_bits, double probability) {
    arrival_process a;
    a.kind = arrival_kind::bernoulli_packet;
    a.bits = packet_bits;
    a.probability = probability;
    a.validate();
    return a;
}

arrival_process arrival_process::poisson_bits(double mean_bits) {
    arrival_process a;
    a.kind = arrival_kind::poisson_bits;
    a.rate = mean_bits;
    a.validate();
    return a;
}

void arrival_process::validate() const {
    switch (kind) {
        case arrival_kind::deterministic:
            if (!(bits >= 0.0 && std::isfinite(bits)))
                throw domain_error("arrival: deterministic bits must be finite and >= 0");
            break;
        case arrival_kind::bernoulli_packet:
            if (!(bits > 0.0 && std::isfinite(bits)))
                throw domain_error("arrival: packet size must be positive");
            if (!(probability > 0.0 && probability <= 1.0))
                throw domain_error("arrival: packet probability must lie in (0, 1]");
            break;
        case arrival_kind::poisson_bits:
            if (!(rate > 0.0 && std::isfinite(rate)))
                throw domain_error("arrival: Poisson mean must be positive");
            break;
    }
}

double arrival_process::mean() const {
    switch (kind) {
        case arrival_kind::deterministic: return bits;
        case arrival_kind::bernoulli_packet: return bits * probability;
        case arrival_kind::poisson_bits: return rate;
    }
    return 0.0;
}

double arrival_process::variance() const {
    switch (kind) {
        case arrival_kind::deterministic: return 0.0;
        case arrival_kind::bernoulli_packet: return bits * bits * probability * (1.0 - probability);
        case arrival_kind::poisson_bits: return rate;
    }
    return 0.0;
}

double arrival_process::log_mgf(double theta) const {
    double v = 0.0;
    switch (kind) {
        case arrival_kind::deterministic: v = theta * bits; break;
        case arrival_kind::bernoulli_packet: {
            double tb = theta * bits;
            if (tb < 30.0)
                v = std::log1p(probability * std::expm1(tb));
            else
                v = tb + std::log(probability + (1.0 - probability) * std::exp(-tb));
            break;
        }
        case arrival_kind::poisson_bits: v = rate * std::expm1(theta); break;
    }
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "arrival: log-MGF diverges at theta = " << theta;
        throw numeric_error(msg.str());
    }
    return v;
}

arrival_process arrival_process::with_mean(double mean_bits) const {
    switch (kind) {
        case arrival_kind::deterministic: return deterministic(mean_bits);
        case arrival_kind::bernoulli_packet: return bernoulli_packet(mean_bits / probability, probability);
        case arrival_kind::poisson_bits: return poisson_bits(mean_bits);
    }
    return *this;
}

double effective_bandwidth(const arrival_process& arrival, double theta) {
    if (!(theta > 0.0)) throw domain_error("effective_bandwidth: theta must be > 0");
    arrival.validate();
    if (arrival.kind == arrival_kind::deterministic) return arrival.bits;
    return arrival.log_mgf(theta) / theta;
}

void service_context::validate() const {
    channel.validate();
    fbc.validate();
}

double service_context::service_bits(double gain) const {
    return fbc.blocklength * rate_function_r(gain, policy, fbc, below_cutoff);
}

namespace {

double below_cutoff_rate(const service_context& ctx) {
    if (ctx.below_cutoff == zero_power_rate::zero) return 0.0;
    return 0.5 * std::log2(ctx.fbc.blocklength) / ctx.fbc.blocklength;
}

// ln E{e^{-lambda r(X)}} with lambda = theta T N, without ARQ.
double log_rate_mgf(const service_context& ctx, double lambda, double* error) {
    const channel_model& ch = ctx.channel;
    if (!ch.continuous()) {
        double acc = -std::numeric_limits<double>::infinity();
        for (const atom& a : atoms(ch)) {
            if (a.prob <= 0.0) continue;
            double r = rate_function_r(a.gain, ctx.policy, ctx.fbc, ctx.below_cutoff);
            acc = numeric::log_add_exp(acc, std::log(a.prob) - lambda * r);
        }
        if (error) *error = 0.0;
        return acc;
    }

    const double cut = ctx.policy.cutoff();
    const double u_star = optimal_received_snr(ctx.fbc);
    double c = rate_of_received_snr(u_star, ctx.fbc).r;
    if (cut > 0.0) c = std::min(c, below_cutoff_rate(ctx));

    std::vector<double> breaks;
    if (cut > 0.0) breaks.push_back(cut);
    double x_star = ctx.policy.invert_received_snr(u_star);
    if (x_star > cut) {
        breaks.push_back(x_star);
        rate_derivatives d = rate_function_derivatives(x_star, ctx.policy, ctx.fbc);
        if (d.d2r > 0.0 && std::isfinite(d.d2r)) {
            double sigma = 1.0 / std::sqrt(lambda * d.d2r);
            for (double k : {-8.0, -3.0, -1.0, 1.0, 3.0, 8.0}) {
                double b = x_star + k * sigma;
                if (b > cut && b > 0.0) breaks.push_back(b);
            }
        }
    }
    auto g = [&](double x) {
        double r = rate_function_r(x, ctx.policy, ctx.fbc, ctx.below_cutoff);
        return std::exp(-lambda * (r - c));
    };
    double err = 0.0;
    double integral = expect(ch, g, breaks, cut, &err);
    if (cut > 0.0) {
        double mass = cdf(ch, cut);
        integral += mass * std::exp(-lambda * (below_cutoff_rate(ctx) - c));
    }
    if (!(integral > 0.0)) throw numeric_error("effective capacity: integral underflowed to zero");
    if (error) *error = err / integral;
    return -lambda * c + std::log(integral);
}

}  // namespace

double log_service_mgf(const service_context& ctx, double theta, double* error) {
    ctx.validate();
    if (!(theta > 0.0)) throw domain_error("effective capacity: theta must be > 0");
    double lambda = theta * ctx.channel.frame_slots * ctx.fbc.blocklength;
    double l = log_rate_mgf(ctx, lambda, error);
    if (ctx.arq) {
        double eps = ctx.fbc.epsilon;
        l = numeric::log_add_exp(std::log(eps), std::log1p(-eps) + l);
    }
    return l;
}

double mean_service_bits(const service_context& ctx) {
    ctx.validate();
    double cut = ctx.policy.cutoff();
    std::vector<double> breaks;
    if (cut > 0.0) breaks.push_back(cut);
    double m = expect(ctx.channel, [&](double x) { return ctx.service_bits(x); }, breaks, cut);
    if (cut > 0.0 && ctx.channel.continuous())
        m += cdf(ctx.channel, cut) * ctx.fbc.blocklength * below_cutoff_rate(ctx);
    if (ctx.arq) m *= 1.0 - ctx.fbc.epsilon;
    return m;
}

ec_estimate effective_capacity_quadrature(const service_context& ctx, double theta) {
    ec_estimate e;
    e.method = ec_method::quadrature;
    if (ctx.channel.kind == channel_kind::awgn && !ctx.arq) {
        ctx.validate();
        if (!(theta > 0.0)) throw domain_error("effective capacity: theta must be > 0");
        e.value = ctx.service_bits(1.0);
    } else {
        double rel = 0.0;
        double l = log_service_mgf(ctx, theta, &rel);
        double tt = theta * ctx.channel.frame_slots;
        e.value = -l / tt;
        e.error = rel / tt;
    }
    e.normalized = e.value / ctx.fbc.blocklength;
    return e;
}

ec_estimate effective_capacity_montecarlo(const service_context& ctx, double theta,
                                          std::size_t n_frames, std::uint64_t seed) {
    ctx.validate();
    if (!(theta > 0.0)) throw domain_error("effective capacity: theta must be > 0");
    if (n_frames < 2) throw domain_error("effective capacity: need at least two frames");
    const double tt = theta * ctx.channel.frame_slots;
    const double eps = ctx.fbc.epsilon;
    gain_sampler sampler(ctx.channel, seed);

    // Running log-sum-exp of w_i = E{e^{-theta T s} | gain_i}, and of w_i^2.
    double shift = -std::numeric_limits<double>::infinity();
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n_frames; ++i) {
        double lw = -tt * ctx.service_bits(sampler.next());
        if (ctx.arq) lw = numeric::log_add_exp(std::log(eps), std::log1p(-eps) + lw);
        if (lw > shift) {
            double f = std::exp(shift - lw);
            s1 *= f;
            s2 *= f * f;
            shift = lw;
        }
        double w = std::exp(lw - shift);
        s1 += w;
        s2 += w * w;
    }
    double n = static_cast<double>(n_frames);
    double m1 = s1 / n;
    double var = std::max(s2 / n - m1 * m1, 0.0) * n / (n - 1.0);

    ec_estimate e;
    e.method = ec_method::monte_carlo;
    e.value = -(shift + std::log(m1)) / tt;
    e.error = std::sqrt(var / n) / m1 / tt;
    e.normalized = e.value / ctx.fbc.blocklength;
    return e;
}

qos_solution solve_qos_exponent(const arrival_process& arrival, const service_context& ctx,
                                double theta_lo, double theta_hi) {
    arrival.validate();
    if (!(theta_lo > 0.0 && theta_hi > theta_lo))
        throw domain_error("solve_qos_exponent: bracket must satisfy 0 < lo < hi");
    double es = mean_service_bits(ctx);
    if (!(arrival.mean() < es)) {
        std::ostringstream msg;
        msg << "unstable queue: mean arrival " << arrival.mean() << " >= mean service " << es
            << " bits per slot";
        throw precondition_error(msg.str());
    }
    auto diff = [&](double th) {
        return effective_bandwidth(arrival, th) - effective_capacity_quadrature(ctx, th).value;
    };
    qos_solution sol;
    double d_lo = diff(theta_lo);
    if (d_lo > 0.0) {
        std::ostringstream msg;
        msg << "solve_qos_exponent: alpha_A - alpha_S = " << d_lo << " > 0 already at theta = "
            << theta_lo << "; lower the bracket";
        throw numeric_error(msg.str());
    }
    double d_hi = diff(theta_hi);
    if (d_hi < 0.0) {
        sol.bounded = false;
        sol.residual = d_hi;
        return sol;
    }
    sol.bounded = true;
    sol.theta = numeric::bisect(diff, theta_lo, theta_hi, true, 400);
    sol.alpha_a = effective_bandwidth(arrival, sol.theta);
    sol.residual = diff(sol.theta);
    return sol;
}

double busy_probability(busy_convention conv, double mean_arrival, double mean_service) {
    if (conv == busy_convention::high_load) return 1.0;
    if (!(mean_service > 0.0)) throw domain_error("busy_probability: mean service must be > 0");
    return std::min(mean_arrival / mean_service, 1.0);
}

double qvp_estimate(const qos_state& state) {
    if (!(state.eta > 0.0 && state.eta <= 1.0)) throw domain_error("qvp: eta must lie in (0, 1]");
    return state.eta * std::exp(-state.theta * state.queue_threshold_bits);
}

double dvp_estimate(const qos_state& state, double alpha_a) {
    return std::exp(-state.theta * alpha_a * state.delay_bound_slots);
}

double dvp_direct(const service_context& ctx, double rho, double delay_bound_slots) {
    double theta = rho / ctx.fbc.blocklength;
    double l = log_service_mgf(ctx, theta);
    return std::exp(delay_bound_slots / ctx.channel.frame_slots * l);
}

double epsilon_chi_bound(const fbc_params& params, const arrival_process& arrival, double L,
                         double chi_th) {
    params.validate();
    arrival.validate();
    if (!(L > 0.0)) throw domain_error("epsilon_chi_bound: L must be > 0");
    if (!(chi_th > 0.0 && chi_th <= 1.0))
        throw domain_error("epsilon_chi_bound: chi_th must lie in (0, 1]");
    double theta = -std::log(chi_th) / L;
    double alpha = theta > 0.0 ? effective_bandwidth(arrival, theta) : arrival.mean();
    double n = params.blocklength, s = params.snr;
    double arg = (n * std::log2(1.0 + s) + 0.5 * std::log2(n) - alpha) / std::sqrt(n * dispersion(s));
    if (arg < 0.0) {
        std::ostringstream msg;
        msg << "epsilon_chi_bound: infeasible, effective bandwidth " << alpha
            << " bits exceeds the rate at eps = 0.5";
        throw precondition_error(msg.str());
    }
    return specfun::gaussian_q(arg);
}

}  // namespace fbqos
