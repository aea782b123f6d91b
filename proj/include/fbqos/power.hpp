#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "fbqos/channels.hpp"

namespace fbqos {

enum class policy_kind { fixed, water_filling, tang_zhang, custom };

std::string to_string(policy_kind k);

// Received SNR u(x) = Xi(x) x and its first two derivatives in x.
struct snr_derivatives {
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
};

// Channel-gain-based power allocation Xi(x) (transmit SNR as a function of
// the power gain). Immutable; build through the named constructors.
class power_policy {
public:
    static power_policy fixed(double snr_linear);
    // Xi(x) = (1/nu0 - 1/(gbar x))^+, zero below the cutoff nu0/gbar.
    static power_policy water_filling(double nu0, double gbar = 1.0);
    // Xi(x) = a1^{-1/(a2+1)} (gamma x)^{-a2/(a2+1)} - 1/(gamma x) above a1/gamma.
    static power_policy tang_zhang(double a1, double a2, double snr_linear);
    static power_policy custom(std::function<double(double)> xi, std::string name = "custom");

    policy_kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double snr() const { return snr_; }
    double nu0() const { return nu0_; }
    double gbar() const { return gbar_; }
    double a1() const { return a1_; }
    double a2() const { return a2_; }

    // Gain below which Xi is zero (0 when power is never switched off).
    double cutoff() const;
    double evaluate(double x) const;
    snr_derivatives received_snr(double x) const;
    // Smallest x with u(x) = u_target, closed form where available.
    double invert_received_snr(double u_target) const;

    // The parameter calibrate_average_power tunes: gamma, nu0 or a1.
    double level() const;
    power_policy with_level(double level) const;

private:
    policy_kind kind_ = policy_kind::fixed;
    std::string name_ = "fixed";
    double snr_ = 1.0;
    double nu0_ = 1.0;
    double gbar_ = 1.0;
    double a1_ = 1.0;
    double a2_ = 1.0;
    std::function<double(double)> custom_;
};

struct admissibility_report {
    bool admissible = true;
    std::optional<double> first_violation;  // gain where Xi + Xi' x first went negative
    double worst_value = 0.0;               // min over the grid of Xi + Xi' x
};

// Checks Xi(x) + Xi'(x) x >= -1e-9 on a strictly increasing positive grid,
// with Xi' by central differences (relative step 1e-6).
admissibility_report check_admissible(const power_policy& policy, std::span<const double> grid);

// E{Xi(|h|^2)}.
double average_power(const power_policy& policy, const channel_model& model);

// Tunes the level parameter so that E{Xi(|h|^2)} = target. On the AWGN
// channel only Xi(1) is ever used, so every template collapses to fixed(target).
power_policy calibrate_average_power(const power_policy& tmpl, const channel_model& model,
                                     double target);

}  // namespace fbqos
