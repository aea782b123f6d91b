#include <doctest.h>

#include <cmath>

#include "../common/two_state_queue.hpp"
#include "fbqos/error.hpp"
#include "fbqos/queuesim.hpp"

using namespace fbqos;

namespace {
sim_config awgn_config(double packet_factor, double probability) {
    sim_config c;
    c.service.channel = channel_model::awgn();
    c.service.policy = power_policy::fixed(3.0);
    c.service.fbc = {100.0, 1e-3, 3.0};
    double s = c.service.service_bits(1.0);
    c.arrival = arrival_process::bernoulli_packet(packet_factor * s, probability);
    c.n_slots = 200000;
    c.warmup = 1000;
    c.seed = 3;
    c.delay_thresholds_slots = {1, 2, 3, 4};
    c.queue_thresholds_bits = {0.5 * s, s};
    return c;
}
}  // namespace

TEST_CASE("Wilson interval") {
    auto [lo, hi] = wilson_interval(0.5, 100);
    CHECK(lo == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(hi == doctest::Approx(0.5962).epsilon(1e-3));
    auto z = wilson_interval(0.0, 1000);
    CHECK(z.first == 0.0);
    CHECK(z.second > 0.0);
    CHECK(wilson_interval(0.3, 0.0) == std::pair<double, double>{0.0, 1.0});
}

TEST_CASE("constant service: short packets leave in one slot") {
    auto c = awgn_config(0.5, 1.0);
    auto r = simulate(c);
    CHECK(r.delay.rows[0].count == 0);  // P(D > 1)
    CHECK(r.queue.rows[0].count == 0);
    CHECK(r.stats.mean_departed_bits == doctest::Approx(r.stats.mean_arrival_bits).epsilon(1e-9));
}

TEST_CASE("constant service: delay is ceil(backlog / s)") {
    // packets of 2.5 s arriving rarely almost always meet an empty queue
    auto c = awgn_config(2.5, 0.01);
    auto r = simulate(c);
    CHECK(r.delay.rows[0].probability == 1.0);  // D > 1
    CHECK(r.delay.rows[1].probability == 1.0);  // D > 2
    CHECK(r.delay.rows[2].probability < 0.05);  // D > 3 needs a leftover backlog
    CHECK(r.delay.rows[2].probability > 0.0);
    CHECK(r.stats.censored_delays <= 1);
}

TEST_CASE("ARQ on AWGN is a reflected random walk") {
    // steps of s/2: up w.p. eps, down w.p. 1 - eps, so P(Q >= j s/2) = (eps/(1-eps))^j
    sim_config c;
    c.service.channel = channel_model::awgn();
    c.service.policy = power_policy::fixed(3.0);
    c.service.fbc = {100.0, 0.3, 3.0};
    c.service.arq = true;
    double s = c.service.service_bits(1.0);
    c.arrival = arrival_process::deterministic(0.5 * s);
    c.n_slots = 1000000;
    c.warmup = 1000;
    c.seed = 17;
    for (int k = 1; k <= 10; ++k) c.queue_thresholds_bits.push_back((k - 0.5) * s);
    auto r = simulate(c);
    double ratio = 0.3 / 0.7;
    for (int k = 1; k <= 10; ++k) {
        const auto& row = r.queue.rows[k - 1];
        double exact = std::pow(ratio, 2 * k - 1);
        CHECK(row.ci_lo <= exact * 1.02);
        CHECK(row.ci_hi >= exact * 0.98);
    }
    CHECK(r.queue.decay_rate * s == doctest::Approx(2 * std::log(1 / ratio)).epsilon(0.05));
}

TEST_CASE("two-state service matches the Markov-chain oracle") {
    fbqos_test::two_state_queue mc;
    double u = 0.0;
    sim_config c;
    c.service = fbqos_test::two_state_service(mc, 0.5, &u);
    c.arrival = arrival_process::bernoulli_packet(mc.packet_units * u, mc.p_arrival);
    c.n_slots = 2000000;
    c.warmup = 10000;
    c.seed = 8;
    c.replications = 2;
    c.jobs = 2;
    std::vector<int> ks = {1, 2, 4, 8, 16, 32};
    for (int k : ks) c.queue_thresholds_bits.push_back((k - 0.5) * u);
    auto r = simulate(c);
    auto exact = mc.tail();
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto& row = r.queue.rows[i];
        INFO("k = " << ks[i] << " exact " << exact[ks[i]] << " sim " << row.probability);
        CHECK(row.ci_lo <= exact[ks[i]]);
        CHECK(row.ci_hi >= exact[ks[i]]);
    }
}

TEST_CASE("results do not depend on the job count") {
    auto c = awgn_config(2.5, 0.3);
    c.replications = 4;
    c.jobs = 1;
    auto a = simulate(c);
    c.jobs = 4;
    auto b = simulate(c);
    for (std::size_t i = 0; i < a.delay.rows.size(); ++i) {
        CHECK(a.delay.rows[i].count == b.delay.rows[i].count);
        CHECK(a.delay.rows[i].ci_lo == b.delay.rows[i].ci_lo);
    }
    CHECK(a.stats.mean_queue_bits == b.stats.mean_queue_bits);
    c.seed = 4;
    CHECK(simulate(c).stats.mean_queue_bits != a.stats.mean_queue_bits);
}

TEST_CASE("configuration checks") {
    auto c = awgn_config(0.5, 1.0);
    c.warmup = c.n_slots;
    CHECK_THROWS_AS(simulate(c), domain_error);
    c = awgn_config(0.5, 1.0);
    c.queue_thresholds_bits = {2.0, 1.0};
    CHECK_THROWS_AS(simulate(c), domain_error);
    c = awgn_config(0.5, 1.0);
    c.service.channel.frame_slots = 3;
    c.n_slots = 1000;
    c.warmup = 0;
    CHECK_THROWS_AS(simulate(c), domain_error);
}

TEST_CASE("compare_ldt needs enough events") {
    auto c = awgn_config(0.5, 1.0);
    auto r = simulate(c);
    qos_state st;
    st.theta = 0.01;
    CHECK_THROWS_AS(compare_ldt(r, st, 1.0), numeric_error);
}
