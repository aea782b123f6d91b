#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "fbqos/channels.hpp"
#include "fbqos/fbc.hpp"
#include "fbqos/power.hpp"

namespace fbqos {

enum class arrival_kind { deterministic, bernoulli_packet, poisson_bits };

std::string to_string(arrival_kind k);

// I.i.d. per-slot arrivals in bits.
struct arrival_process {
    arrival_kind kind = arrival_kind::deterministic;
    double bits = 0.0;         // deterministic amount or packet size
    double probability = 1.0;  // packet probability (Bernoulli)
    double rate = 0.0;         // Poisson mean in bits

    static arrival_process deterministic(double bits_per_slot);
    static arrival_process bernoulli_packet(double packet_bits, double probability);
    static arrival_process poisson_bits(double mean_bits);

    void validate() const;
    double mean() const;
    double variance() const;
    // ln E{e^{theta a}}; throws numeric_error when it overflows.
    double log_mgf(double theta) const;
    // Same process rescaled to a new mean (packet probability or rate kept
    // fixed where the law allows; Bernoulli rescales the packet size).
    arrival_process with_mean(double mean_bits) const;

    template <class Rng>
    double sample(Rng& rng) const {
        switch (kind) {
            case arrival_kind::deterministic: return bits;
            case arrival_kind::bernoulli_packet:
                return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < probability ? bits
                                                                                             : 0.0;
            case arrival_kind::poisson_bits:
                return static_cast<double>(std::poisson_distribution<long long>(rate)(rng));
        }
        return 0.0;
    }
};

// alpha_A(theta) = ln E{e^{theta a}} / theta, bits per slot.
double effective_bandwidth(const arrival_process& arrival, double theta);

// Channel, power policy and code parameters defining the service process
// s = N r(|h|^2) bits per slot, constant over a frame of T slots.
struct service_context {
    channel_model channel;
    power_policy policy = power_policy::fixed(1.0);
    fbc_params fbc;
    bool arq = false;  // deliver with probability 1 - eps, else nothing
    zero_power_rate below_cutoff = zero_power_rate::half_log2_blocklength;

    void validate() const;
    double service_bits(double gain) const;
};

enum class ec_method { quadrature, monte_carlo, laplace };

std::string to_string(ec_method m);

struct ec_estimate {
    double value = 0.0;       // bits per slot
    double normalized = 0.0;  // bits per channel use (value / N)
    ec_method method = ec_method::quadrature;
    double error = 0.0;  // quadrature error or Monte Carlo standard error, bits per slot
};

// ln E{e^{-theta T s}} for one frame of service (ARQ included when enabled).
double log_service_mgf(const service_context& ctx, double theta, double* error = nullptr);

// Mean service E{s} in bits per slot; (1 - eps) E{s} under ARQ.
double mean_service_bits(const service_context& ctx);

// -(1/(theta T)) ln E{e^{-theta T N r(|h|^2)}} by adaptive quadrature.
ec_estimate effective_capacity_quadrature(const service_context& ctx, double theta);

// Same expectation as a sample mean over n_frames i.i.d. frame gains; the
// standard error is propagated by the delta method.
ec_estimate effective_capacity_montecarlo(const service_context& ctx, double theta,
                                          std::size_t n_frames, std::uint64_t seed);

struct qos_solution {
    bool bounded = false;  // false: alpha_A < alpha_S over the whole bracket
    double theta = 0.0;
    double alpha_a = 0.0;  // effective bandwidth at the root
    double residual = 0.0; // alpha_A - alpha_S at the root, bits per slot
};

// Root of alpha_A(theta) = alpha_S(theta). Throws precondition_error when
// the queue is unstable (mu_a >= E{s}) and numeric_error when the difference
// is already positive at the lower end of the bracket.
qos_solution solve_qos_exponent(const arrival_process& arrival, const service_context& ctx,
                                double theta_lo = 1e-9, double theta_hi = 10.0);

enum class busy_convention { high_load, load_ratio };

struct qos_state {
    double theta = 0.0;
    double blocklength = 1.0;
    double queue_threshold_bits = 0.0;
    double delay_bound_slots = 0.0;
    double eta = 1.0;

    double rho() const { return theta * blocklength; }
};

// eta = 1 (high load) or min(mu_a / mu_s, 1).
double busy_probability(busy_convention conv, double mean_arrival, double mean_service);

// chi = eta e^{-theta L}.
double qvp_estimate(const qos_state& state);

// delta = e^{-theta alpha_A(theta) D_max}.
double dvp_estimate(const qos_state& state, double alpha_a);

// delta = exp((D_max / T) ln E{exp(-rho T r(|h|^2))}), the same LDT estimate
// written through the revised exponent rho = theta N.
double dvp_direct(const service_context& ctx, double rho, double delay_bound_slots);

// Smallest eps meeting chi <= chi_th at queue threshold L on the AWGN
// channel with transmit SNR params.snr and G = 0. Throws precondition_error
// when the requirement needs eps > 0.5.
double epsilon_chi_bound(const fbc_params& params, const arrival_process& arrival, double L,
                         double chi_th);

}  // namespace fbqos
