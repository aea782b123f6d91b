#include "fbqos/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"
#include "fbqos/qos.hpp"
#include "fbqos/specfun.hpp"

namespace fbqos {

std::string to_string(psi_form f) {
    switch (f) {
        case psi_form::constant: return "constant";
        case psi_form::polylog: return "polylog";
        case psi_form::exp_qinv: return "exp_qinv";
        case psi_form::table: return "table";
    }
    return "unknown";
}

std::string to_string(epsilon_form f) {
    return f == epsilon_form::fixed ? "fixed" : "power_law";
}

double theoretical_slope(const channel_model& model, double rho, int frame_slots) {
    model.validate();
    if (!(rho > 0.0)) throw domain_error("theoretical_slope: rho must be > 0");
    if (!model.continuous()) return 1.0;
    return std::min(1.0, model.shape() / (rho * frame_slots * log2e));
}

double theoretical_slope(const channel_model& model, double rho) {
    return theoretical_slope(model, rho, model.frame_slots);
}

namespace {

void check_grid(const std::vector<double>& grid, std::size_t min_points) {
    if (grid.size() < min_points) throw domain_error("SNR grid has too few points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw domain_error("SNR grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw domain_error("SNR grid must be increasing");
    }
}

double normalized_ec(const channel_model& model, const fbc_params& params, double theta,
                     double snr) {
    service_context ctx;
    ctx.channel = model;
    ctx.fbc = params;
    ctx.policy = power_policy::fixed(snr);
    return effective_capacity_quadrature(ctx, theta).normalized;
}

// d f / dy at y by Richardson extrapolation of central differences.
template <class F>
double richardson(F&& f, double y, double h) {
    auto central = [&](double step) { return (f(y + step) - f(y - step)) / (2.0 * step); };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace

slope_fit empirical_slope(const channel_model& model, const fbc_params& params, double theta,
                          const std::vector<double>& snr_grid_linear) {
    check_grid(snr_grid_linear, 3);
    slope_fit out;
    for (double g : snr_grid_linear) {
        out.log2_snr.push_back(std::log2(g));
        out.lambda.push_back(normalized_ec(model, params, theta, g));
    }
    numeric::line_fit lf = numeric::fit_line(out.log2_snr, out.lambda);
    out.slope = lf.slope;
    out.intercept = lf.intercept;
    out.r2 = lf.r2;
    out.ill_conditioned = lf.r2 < 0.999;
    std::size_t n = out.lambda.size();
    out.endpoint_derivative =
        (out.lambda[n - 1] - out.lambda[n - 2]) / (out.log2_snr[n - 1] - out.log2_snr[n - 2]);
    return out;
}

void psi_schedule::validate() const {
    if (!(c0 > 0.0)) throw domain_error("psi schedule: c0 must be > 0");
    switch (form) {
        case psi_form::constant:
            if (!(value >= 1.0)) throw domain_error("psi schedule: constant value must be >= 1");
            break;
        case psi_form::polylog:
            if (!(scale > 0.0)) throw domain_error("psi schedule: polylog scale must be > 0");
            break;
        case psi_form::exp_qinv:
            if (!(margin > 0.0)) throw domain_error("psi schedule: margin must be > 0");
            break;
        case psi_form::table:
            if (table_snr.size() < 2 || table_snr.size() != table_psi.size())
                throw domain_error("psi schedule: table needs >= 2 matching (snr, psi) pairs");
            for (std::size_t i = 0; i < table_snr.size(); ++i) {
                if (!(table_snr[i] > 0.0 && table_psi[i] >= 1.0))
                    throw domain_error("psi schedule: table entries must be positive, psi >= 1");
                if (i > 0 && !(table_snr[i] > table_snr[i - 1]))
                    throw domain_error("psi schedule: table SNRs must increase");
            }
            break;
    }
    if (eps_form == epsilon_form::fixed) {
        if (!(eps0 > 0.0 && eps0 <= 0.5)) throw domain_error("psi schedule: eps must lie in (0, 0.5]");
    } else if (!(beta > 0.0)) {
        throw domain_error("psi schedule: power-law beta must be > 0");
    }
}

double psi_schedule::epsilon(double snr) const {
    if (eps_form == epsilon_form::fixed) return eps0;
    double e = std::pow(snr, -beta);
    if (!(e > 0.0 && e <= 0.5)) {
        std::ostringstream msg;
        msg << "psi schedule: eps(gamma) = " << e << " outside (0, 0.5] at gamma = " << snr;
        throw domain_error(msg.str());
    }
    return e;
}

double psi_schedule::psi(double snr) const {
    if (!(snr > 1.0)) throw domain_error("psi schedule: gamma must exceed 1");
    switch (form) {
        case psi_form::constant: return value;
        case psi_form::polylog: return std::max(1.0, scale * std::pow(std::log2(snr), power));
        case psi_form::exp_qinv: {
            double e = epsilon(snr);
            double q = e == 0.5 ? 0.0 : specfun::gaussian_q_inv(e);
            double s2 = varsigma_thresholds(c0, 0.5).varsigma2;
            return std::exp(0.25 * q * q) + (s2 + margin) / (e * e);
        }
        case psi_form::table: {
            double ly = std::log(snr);
            std::size_t n = table_snr.size();
            std::size_t i = 1;
            while (i + 1 < n && std::log(table_snr[i]) < ly) ++i;
            double x0 = std::log(table_snr[i - 1]), x1 = std::log(table_snr[i]);
            double y0 = std::log(table_psi[i - 1]), y1 = std::log(table_psi[i]);
            return std::exp(y0 + (y1 - y0) * (ly - x0) / (x1 - x0));
        }
    }
    return value;
}

varsigma_values varsigma_thresholds(double c0, double epsilon) {
    if (!(c0 > 0.0)) throw domain_error("varsigma_thresholds: c0 must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw domain_error("varsigma_thresholds: eps must lie in (0, 1)");
    // Unit-c0 supremum, computed once.
    static const double sup1 = [] {
        double best = specfun::k_over_dispersion_32_limit(1.0);
        for (double x : numeric::logspace(1e-6, 1e6, 10000))
            best = std::max(best, specfun::k_over_dispersion_32(x, 1.0));
        return best;
    }();
    varsigma_values v;
    v.varsigma2 = 4.0 * c0 * c0 * sup1 * sup1;
    double m = std::min(epsilon, 1.0 - epsilon);
    v.varsigma1 = v.varsigma2 / (m * m);
    return v;
}

namespace {

// log-log slope of ratio(gamma) over the top decade of the grid.
template <class F>
double top_decade_trend(const std::vector<double>& grid, F&& ratio) {
    double top = grid.back();
    std::vector<double> x, y;
    for (double g : grid) {
        if (g >= top / 10.0 * (1.0 - 1e-12)) {
            x.push_back(std::log(g));
            y.push_back(std::log(ratio(g)));
        }
    }
    if (x.size() < 2) {
        x = {std::log(top / 10.0), std::log(top)};
        y = {std::log(ratio(top / 10.0)), std::log(ratio(top))};
    }
    return numeric::fit_line(x, y).slope;
}

}  // namespace

psi_check check_psi(const psi_schedule& schedule, const std::vector<double>& grid,
                    double trend_tolerance) {
    schedule.validate();
    check_grid(grid, 2);
    psi_check out;
    double s2 = varsigma_thresholds(schedule.c0, 0.5).varsigma2;
    double w2 = INFINITY, w3 = INFINITY;
    for (double g : grid) {
        double e = schedule.epsilon(g);
        double p = schedule.psi(g);
        double s1 = varsigma_thresholds(schedule.c0, e).varsigma1;
        w2 = std::min(w2, p / s1);
        w3 = std::min(w3, p * e * e / s2);
    }
    out.fixed_eps = {w2 > 1.0, w2};
    out.power_law_margin = {w3 > 1.0, w3};
    auto qinv = [&](double g) {
        double e = schedule.epsilon(g);
        return e == 0.5 ? 0.0 : specfun::gaussian_q_inv(e);
    };
    double t_exp = top_decade_trend(grid, [&](double g) {
        double q = qinv(g);
        return std::exp(0.25 * q * q) / schedule.psi(g);
    });
    out.power_law_exp = {t_exp <= trend_tolerance, t_exp};
    double t_q = schedule.eps_form == epsilon_form::fixed && schedule.eps0 == 0.5
                     ? 0.0
                     : top_decade_trend(grid, [&](double g) { return qinv(g) / std::sqrt(schedule.psi(g)); });
    out.power_law_qinv = {t_q <= trend_tolerance, t_q};
    return out;
}

gain_report gains_report(const channel_model& model, const psi_schedule& schedule, double rho,
                         const std::vector<double>& grid) {
    model.validate();
    schedule.validate();
    check_grid(grid, 2);
    if (!(rho > 0.0)) throw domain_error("gains_report: rho must be > 0");

    psi_check chk = check_psi(schedule, grid);
    if (schedule.eps_form == epsilon_form::fixed) {
        if (!chk.fixed_eps.pass) {
            std::ostringstream msg;
            msg << "gains_report: schedule violates Psi > varsigma_1 (worst ratio "
                << chk.fixed_eps.worst << ")";
            throw precondition_error(msg.str());
        }
    } else if (!chk.power_law_ok()) {
        std::ostringstream msg;
        msg << "gains_report: power-law schedule fails its admissibility conditions (margin "
            << chk.power_law_margin.worst << ", exp trend " << chk.power_law_exp.worst
            << ", Q^-1 trend " << chk.power_law_qinv.worst << ")";
        throw precondition_error(msg.str());
    }

    const int T = model.frame_slots;
    auto context_at = [&](double y) {
        double g = std::exp2(y);
        service_context ctx;
        ctx.channel = model;
        ctx.fbc = {schedule.psi(g), schedule.epsilon(g), g};
        ctx.policy = power_policy::fixed(g);
        return ctx;
    };
    auto lambda = [&](double y) {
        service_context ctx = context_at(y);
        double theta = rho / ctx.fbc.blocklength;
        return effective_capacity_quadrature(ctx, theta).normalized;
    };
    // log2 delta per unit delay bound, from the revised-exponent DVP form.
    auto log2_delta = [&](double y) {
        service_context ctx = context_at(y);
        double theta = rho / ctx.fbc.blocklength;
        return log2e * log_service_mgf(ctx, theta) / T;
    };
    auto sqrt_log_eps = [&](double y) { return std::sqrt(-std::log2(schedule.epsilon(std::exp2(y)))); };
    auto sqrt_psi = [&](double y) { return std::sqrt(schedule.psi(std::exp2(y))); };

    double y = std::log2(grid.back());
    double h = y - std::log2(grid[grid.size() - 2]);

    gain_report r;
    r.snr_top = grid.back();
    r.blocklength_top = schedule.psi(r.snr_top);
    r.epsilon_top = schedule.epsilon(r.snr_top);
    r.zeta = richardson(lambda, y, h);
    r.tau = -richardson(log2_delta, y, h);
    r.varpi = schedule.eps_form == epsilon_form::fixed
                  ? 0.0
                  : std::sqrt(2.0 * log2e) * richardson(sqrt_log_eps, y, h) /
                        std::sqrt(r.blocklength_top);
    double dsp = schedule.form == psi_form::constant ? 0.0 : richardson(sqrt_psi, y, h);
    r.c4 = 1.0 / (1.0 + dsp * y / sqrt_psi(y));
    r.slope_theory = theoretical_slope(model, rho, T);
    r.residual_conservation = std::abs(r.zeta + r.c4 * r.varpi - r.slope_theory);
    r.residual_tau = std::abs(r.tau - rho * log2e * r.zeta);
    return r;
}

}  // namespace fbqos
