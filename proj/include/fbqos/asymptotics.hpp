#pragma once

#include <string>
#include <vector>

#include "fbqos/channels.hpp"
#include "fbqos/fbc.hpp"

namespace fbqos {

// High-SNR slope of the normalized EC at rho = theta N: 1 on AWGN (and any
// channel whose gain is bounded away from zero), min{1, m/(rho T log2 e)}
// for Gamma-distributed gains with shape m.
double theoretical_slope(const channel_model& model, double rho, int frame_slots);
double theoretical_slope(const channel_model& model, double rho);

struct slope_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double endpoint_derivative = 0.0;  // secant over the last two grid points
    bool ill_conditioned = false;      // r2 < 0.999
    std::vector<double> log2_snr;
    std::vector<double> lambda;  // normalized EC, bits per channel use
};

// Least-squares slope of Lambda(gamma) against log2(gamma) under fixed power,
// with Lambda from effective_capacity_quadrature. params.snr is ignored.
slope_fit empirical_slope(const channel_model& model, const fbc_params& params, double theta,
                          const std::vector<double>& snr_grid_linear);

enum class psi_form { constant, polylog, exp_qinv, table };
enum class epsilon_form { fixed, power_law };

std::string to_string(psi_form f);
std::string to_string(epsilon_form f);

// Blocklength schedule N = Psi(gamma) together with eps(gamma).
//   constant: Psi = value
//   polylog:  Psi = scale (log2 gamma)^power
//   exp_qinv: Psi = e^{(Q^{-1}(eps)/2)^2} + (varsigma_2(c0) + margin)/eps^2
//   table:    log-log interpolation through (gamma, Psi) pairs
// eps(gamma) is either eps0 or gamma^{-beta}.
struct psi_schedule {
    psi_form form = psi_form::constant;
    double value = 1.0;
    double scale = 1.0;
    double power = 2.0;
    double margin = 1.0;
    double c0 = 1.0;
    std::vector<double> table_snr;
    std::vector<double> table_psi;

    epsilon_form eps_form = epsilon_form::fixed;
    double eps0 = 1e-3;
    double beta = 0.5;

    void validate() const;
    double epsilon(double snr) const;
    double psi(double snr) const;
};

struct varsigma_values {
    double varsigma1 = 0.0;
    double varsigma2 = 0.0;
};

// varsigma_2 = 4 sup_x (K/V^{3/2})^2 and varsigma_1 = varsigma_2 / min(eps, 1-eps)^2.
// The ratio K/V^{3/2} increases towards its x -> infinity limit, so the
// supremum is the larger of a dense-grid maximum and that limit.
varsigma_values varsigma_thresholds(double c0, double epsilon);

struct condition_result {
    bool pass = true;
    double worst = 0.0;  // smallest margin ratio, or largest top-decade trend
};

struct psi_check {
    // fixed eps
    condition_result fixed_eps;         // Psi / varsigma_1 > 1
    // power-law eps
    condition_result power_law_margin;  // Psi eps^2 / varsigma_2 > 1
    condition_result power_law_exp;     // trend of e^{(Q^{-1}/2)^2}/Psi
    condition_result power_law_qinv;    // trend of Q^{-1}/sqrt(Psi)
    bool power_law_ok() const {
        return power_law_margin.pass && power_law_exp.pass && power_law_qinv.pass;
    }
};

// A ratio counts as bounded when its log-log slope over the top decade of the
// grid is at most trend_tolerance.
psi_check check_psi(const psi_schedule& schedule, const std::vector<double>& snr_grid_linear,
                    double trend_tolerance = 0.05);

struct gain_report {
    double zeta = 0.0;   // service-rate gain dLambda/dlog2(gamma)
    double varpi = 0.0;  // reliability gain
    double tau = 0.0;    // real-time gain
    double c4 = 1.0;
    double slope_theory = 0.0;
    double residual_conservation = 0.0;  // |zeta + c4 varpi - slope_theory|
    double residual_tau = 0.0;           // |tau - rho log2e zeta|
    double snr_top = 0.0;
    double blocklength_top = 0.0;
    double epsilon_top = 0.0;
};

// Derivatives are taken at the top of the grid in log2(gamma) by Richardson
// extrapolation of central differences with step h and h/2, where h is the
// last grid spacing. theta = rho / Psi(gamma), so rho is held fixed.
// Throws precondition_error when the schedule fails its admissibility check
// (psi_check::fixed_eps for fixed eps, power_law_ok() for power-law eps).
gain_report gains_report(const channel_model& model, const psi_schedule& schedule, double rho,
                         const std::vector<double>& snr_grid_linear);

}  // namespace fbqos
