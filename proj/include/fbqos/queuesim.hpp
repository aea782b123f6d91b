#pragma once

#include <cstdint>
#include <vector>

#include "fbqos/qos.hpp"

namespace fbqos {

struct sim_config {
    service_context service;  // channel, policy, code; service.arq drops failed slots
    arrival_process arrival;
    std::uint64_t n_slots = 1000000;  // per replication, after warmup
    std::uint64_t warmup = 10000;
    std::uint64_t seed = 1;
    int replications = 1;
    int jobs = 1;
    int batches = 100;  // per replication, for batch-means intervals
    std::vector<double> queue_thresholds_bits;
    std::vector<double> delay_thresholds_slots;

    void validate() const;
};

struct tail_row {
    double threshold = 0.0;
    std::uint64_t count = 0;
    double probability = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct tail_estimate {
    std::vector<tail_row> rows;
    std::uint64_t samples = 0;
    // Weighted least squares of ln p against threshold over rows with at
    // least 100 events, top decile of thresholds excluded. NaN when fewer
    // than two rows qualify.
    double decay_rate = 0.0;
    double decay_stderr = 0.0;
    double fit_r2 = 0.0;
    std::size_t fit_points = 0;
};

struct throughput_stats {
    double mean_arrival_bits = 0.0;
    double mean_service_bits = 0.0;   // offered service per slot
    double mean_departed_bits = 0.0;
    double mean_queue_bits = 0.0;
    double max_queue_bits = 0.0;
    double final_queue_bits = 0.0;
    std::uint64_t censored_delays = 0;  // arrivals still queued at the horizon
    bool unstable = false;             // mean arrival >= mean service
};

struct sim_result {
    tail_estimate queue;  // P(Q >= L)
    tail_estimate delay;  // P(D > d), D in slots, last bit of each arrival
    throughput_stats stats;
};

// Fluid Lindley queue Q[n] = (Q[n-1] + a[n] - s[n])^+ with s[n] = N r(x)
// bits and x redrawn every T slots. The delay of the slot-m arrival is
// n - m + 1 for the first n whose cumulative departures cover every bit that
// arrived up to m. Replications run in parallel on derived seeds.
sim_result simulate(const sim_config& config);

struct ldt_row {
    double threshold = 0.0;
    double empirical = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;  // empirical / predicted
};

struct ldt_comparison {
    double decay_ratio = 0.0;  // fitted queue decay / theta
    std::vector<ldt_row> queue;
    std::vector<ldt_row> delay;
    bool decay_pass = false;  // |ratio - 1| <= decay_tolerance
    bool delay_pass = false;  // ratios in [1/f, f] where predicted in [p_lo, p_hi]
    std::size_t delay_rows_checked = 0;
};

struct ldt_tolerances {
    double decay = 0.10;
    double delay_factor = 3.0;
    double delay_p_lo = 1e-4;
    double delay_p_hi = 1e-2;
};

// Compares simulated tails with chi = eta e^{-theta L} and
// delta = e^{-theta alpha_A D}. Throws numeric_error when no queue threshold
// has 100 exceedances.
ldt_comparison compare_ldt(const sim_result& sim, const qos_state& state, double alpha_a,
                           const ldt_tolerances& tol = {});

// Wilson score interval at 95% for k successes in n_eff effective trials.
std::pair<double, double> wilson_interval(double p_hat, double n_eff);

}  // namespace fbqos
