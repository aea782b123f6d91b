#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbqos/asymptotics.hpp"
#include "fbqos/laplace.hpp"
#include "fbqos/qos.hpp"
#include "fbqos/queuesim.hpp"

namespace fbqos::cli {

// Malformed JSON, a schema violation or an out-of-range value. The message
// names the offending key as a dotted path.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arrival given either absolutely or as a fraction of the mean service.
struct arrival_spec {
    arrival_process process;
    std::optional<double> load_fraction;

    arrival_process resolve(double mean_service_bits) const;
};

struct ec_section {
    std::vector<double> theta_per_bit;
    std::size_t mc_frames = 200000;
    std::vector<laplace_variant> laplace_variants;  // empty: choose from policy and ARQ
    truncated_prefactor prefactor = truncated_prefactor::per_frame;
};

struct slope_section {
    std::vector<double> theta_per_bit;
    std::vector<double> snr_linear;
};

struct gains_section {
    double rho = 1.0;
    std::vector<double> snr_linear;
    psi_schedule schedule;
};

struct simulate_section {
    std::uint64_t slots = 1000000;
    std::uint64_t warmup_slots = 10000;
    int replications = 1;
    int batches = 100;
    std::vector<double> queue_thresholds_bits;
    std::vector<double> delay_thresholds_slots;
    busy_convention busy = busy_convention::high_load;
    ldt_tolerances tolerances;
};

struct tradeoff_section {
    double snr_linear = 1.0;
    double blocklength = 1.0;
    double queue_threshold_bits = 1.0;
    std::vector<double> chi_threshold;
};

struct check_section {
    std::vector<double> snr_linear;
    psi_schedule schedule;
    double trend_tolerance = 0.05;
};

struct run_config {
    std::optional<channel_model> channel;
    std::optional<power_policy> policy;
    std::optional<double> policy_mean_snr;  // calibrate policy level to this mean
    std::optional<fbc_params> code;
    bool arq = false;
    zero_power_rate below_cutoff = zero_power_rate::half_log2_blocklength;
    std::optional<arrival_spec> arrival;

    std::optional<ec_section> ec;
    std::optional<slope_section> slope;
    std::optional<gains_section> gains;
    std::optional<simulate_section> simulate;
    std::optional<tradeoff_section> tradeoff;
    std::optional<check_section> check;

    std::uint64_t seed = 1;
    std::optional<std::string> output_dir;

    // Channel, calibrated policy and code assembled into a service context.
    // Throws config_error when a required section is missing.
    service_context service() const;
};

run_config parse_config_text(const std::string& text);
run_config load_config(const std::string& path);

}  // namespace fbqos::cli
