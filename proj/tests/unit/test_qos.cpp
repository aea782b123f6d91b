#include <doctest.h>

#include <cmath>

#include "fbqos/error.hpp"
#include "fbqos/qos.hpp"

using namespace fbqos;

namespace {
service_context rayleigh_ctx(double n, int T, double eps = 1e-3, double snr = 10.0) {
    service_context c;
    c.channel = channel_model::rayleigh(1.0, T);
    c.policy = power_policy::fixed(snr);
    c.fbc.blocklength = n;
    c.fbc.epsilon = eps;
    c.fbc.snr = snr;
    return c;
}
}  // namespace

TEST_CASE("Rayleigh EC against the mpmath oracle") {
    struct row {
        double n;
        int T;
        double theta, expect;
    };
    for (auto r : {row{500, 5, 0.01, 98.148346603292451}, row{100, 1, 0.1, 35.438814817839636},
                   row{500, 1, 0.001, 1151.5904522921587}}) {
        auto e = effective_capacity_quadrature(rayleigh_ctx(r.n, r.T), r.theta);
        CHECK(e.value == doctest::Approx(r.expect).epsilon(1e-9));
        CHECK(e.normalized == doctest::Approx(r.expect / r.n).epsilon(1e-9));
        CHECK(e.error < 1e-6 * e.value);
    }
}

TEST_CASE("Nakagami EC against the mpmath oracle") {
    service_context c;
    c.channel = channel_model::nakagami(2.0, 1.0, 2);
    c.policy = power_policy::fixed(100.0);
    c.fbc = {200.0, 1e-2, 100.0};
    CHECK(effective_capacity_quadrature(c, 0.05).value ==
          doctest::Approx(130.38521917145648).epsilon(1e-9));
}

TEST_CASE("water-filling EC and mean service against the oracle") {
    service_context wf;
    wf.channel = channel_model::rayleigh_diversity(2);
    wf.policy = power_policy::water_filling(0.091276527160862264);
    wf.fbc = {1000.0, 1e-3, 10.0};
    CHECK(mean_service_bits(wf) == doctest::Approx(3932.217408301217).epsilon(1e-9));
    CHECK(effective_capacity_quadrature(wf, 0.1).value ==
          doctest::Approx(59.597761373443047).epsilon(1e-9));

    service_context fixed = wf;
    fixed.policy = power_policy::fixed(10.0);
    CHECK(mean_service_bits(fixed) == doctest::Approx(3923.447517667403).epsilon(1e-9));
}

TEST_CASE("EC tends to the mean service as theta shrinks") {
    auto c = rayleigh_ctx(500, 1);
    double es = mean_service_bits(c);
    CHECK(es == doctest::Approx(1362.7126568591119).epsilon(1e-9));
    CHECK(effective_capacity_quadrature(c, 1e-9).value == doctest::Approx(es).epsilon(1e-6));
    double prev = es;
    for (double th : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        double v = effective_capacity_quadrature(c, th).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("AWGN EC is the constant service") {
    service_context c;
    c.channel = channel_model::awgn();
    c.policy = power_policy::fixed(3.0);
    c.fbc = {256.0, 1e-4, 3.0};
    double s = c.service_bits(1.0);
    CHECK(s == doctest::Approx(normal_approx_rate(c.fbc, 1.0).total_bits).epsilon(1e-14));
    for (double th : {1e-3, 0.1, 5.0}) {
        CHECK(effective_capacity_quadrature(c, th).value == s);
        CHECK(effective_capacity_montecarlo(c, th, 1000, 1).value == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("ARQ mixes a zero-service failure into the MGF") {
    auto plain = rayleigh_ctx(100, 1, 1e-2);
    auto arq = plain;
    arq.arq = true;
    double th = 0.05, eps = 1e-2;
    double l = log_service_mgf(plain, th);
    double expect = -std::log(eps + (1 - eps) * std::exp(l)) / th;
    CHECK(effective_capacity_quadrature(arq, th).value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(mean_service_bits(arq) == doctest::Approx((1 - eps) * mean_service_bits(plain)));
    // The unclamped rate dips below zero near u*, so at large theta both
    // forms go negative; ARQ caps the MGF from below at eps.
    CHECK(effective_capacity_quadrature(arq, 50.0).value >
          effective_capacity_quadrature(plain, 50.0).value);
    CHECK(effective_capacity_quadrature(arq, 50.0).value <= -std::log(eps) / 50.0);
}

TEST_CASE("Monte Carlo EC agrees with quadrature and is reproducible") {
    auto c = rayleigh_ctx(500, 5);
    for (double th : {0.001, 0.01, 0.1}) {
        auto q = effective_capacity_quadrature(c, th);
        auto mc = effective_capacity_montecarlo(c, th, 200000, 99);
        CHECK(mc.error > 0.0);
        CHECK(std::abs(mc.value - q.value) < 4.0 * mc.error);
        CHECK(mc.value == effective_capacity_montecarlo(c, th, 200000, 99).value);
    }
}

TEST_CASE("effective bandwidth of the arrival laws") {
    auto d = arrival_process::deterministic(40.0);
    CHECK(effective_bandwidth(d, 0.3) == 40.0);
    auto p = arrival_process::poisson_bits(100.0);
    CHECK(effective_bandwidth(p, 0.01) == doctest::Approx(100.0 * std::expm1(0.01) / 0.01));
    auto b = arrival_process::bernoulli_packet(1000.0, 0.2);
    CHECK(effective_bandwidth(b, 1e-9) == doctest::Approx(200.0).epsilon(1e-6));
    // large theta: approaches the packet size from below
    CHECK(effective_bandwidth(b, 1.0) == doctest::Approx(1000.0 + std::log(0.2)).epsilon(1e-12));
    CHECK(b.with_mean(100.0).bits == doctest::Approx(500.0));
    CHECK(b.variance() == doctest::Approx(1e6 * 0.16));
    CHECK_THROWS_AS(p.log_mgf(800.0), numeric_error);
    CHECK_THROWS_AS(arrival_process::bernoulli_packet(10.0, 0.0), domain_error);
    CHECK_THROWS_AS(effective_bandwidth(p, 0.0), domain_error);
}

TEST_CASE("QoS exponent of the high-load Rayleigh queue") {
    auto c = rayleigh_ctx(500, 1);
    auto a = arrival_process::poisson_bits(0.95 * 1362.7126568591119);
    auto sol = solve_qos_exponent(a, c);
    REQUIRE(sol.bounded);
    CHECK(sol.theta == doctest::Approx(3.1942841787843303e-4).epsilon(1e-8));
    CHECK(std::abs(sol.residual) < 1e-8 * sol.alpha_a);

    qos_state st;
    st.theta = sol.theta;
    st.blocklength = 500;
    st.delay_bound_slots = 7;
    CHECK(dvp_direct(c, st.rho(), 7) == doctest::Approx(dvp_estimate(st, sol.alpha_a)).epsilon(1e-8));

    CHECK_THROWS_AS(solve_qos_exponent(arrival_process::poisson_bits(1400.0), c), precondition_error);
    // light load: EB stays below EC over the whole bracket
    auto light = solve_qos_exponent(arrival_process::deterministic(1.0), c, 1e-9, 1e-3);
    CHECK_FALSE(light.bounded);
}

TEST_CASE("violation probability helpers") {
    CHECK(busy_probability(busy_convention::high_load, 1, 2) == 1.0);
    CHECK(busy_probability(busy_convention::load_ratio, 1, 4) == 0.25);
    CHECK(busy_probability(busy_convention::load_ratio, 5, 4) == 1.0);
    qos_state st;
    st.theta = 0.01;
    st.queue_threshold_bits = 300;
    st.eta = 0.5;
    CHECK(qvp_estimate(st) == doctest::Approx(0.5 * std::exp(-3.0)));
    st.eta = 0.0;
    CHECK_THROWS_AS(qvp_estimate(st), domain_error);
}

TEST_CASE("epsilon chi bound") {
    fbc_params p{400.0, 1e-3, 4.0};
    auto a = arrival_process::poisson_bits(700.0);
    double eps = epsilon_chi_bound(p, a, 5000.0, 1e-3);
    CHECK(eps > 0.0);
    CHECK(eps < 0.5);
    // the service rate at eps_min equals the effective bandwidth at theta_th
    double theta = -std::log(1e-3) / 5000.0;
    fbc_params at{400.0, eps, 4.0};
    CHECK(normal_approx_rate(at, 1.0).total_bits ==
          doctest::Approx(effective_bandwidth(a, theta)).epsilon(1e-9));
    CHECK_THROWS_AS(epsilon_chi_bound(p, arrival_process::poisson_bits(2000.0), 5000.0, 1e-3),
                    precondition_error);
}
