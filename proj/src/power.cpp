#include "fbqos/power.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"

namespace fbqos {

std::string to_string(policy_kind k) {
    switch (k) {
        case policy_kind::fixed: return "fixed";
        case policy_kind::water_filling: return "water_filling";
        case policy_kind::tang_zhang: return "tang_zhang";
        case policy_kind::custom: return "custom";
    }
    return "unknown";
}

power_policy power_policy::fixed(double snr_linear) {
    if (!(snr_linear > 0.0 && std::isfinite(snr_linear)))
        throw domain_error("fixed policy: SNR must be positive and finite");
    power_policy p;
    p.kind_ = policy_kind::fixed;
    p.name_ = "fixed";
    p.snr_ = snr_linear;
    return p;
}

power_policy power_policy::water_filling(double nu0, double gbar) {
    if (!(nu0 > 0.0 && std::isfinite(nu0)))
        throw domain_error("water-filling policy: nu0 must be positive");
    if (!(gbar > 0.0 && std::isfinite(gbar)))
        throw domain_error("water-filling policy: gbar must be positive");
    power_policy p;
    p.kind_ = policy_kind::water_filling;
    p.name_ = "water_filling";
    p.nu0_ = nu0;
    p.gbar_ = gbar;
    return p;
}

power_policy power_policy::tang_zhang(double a1, double a2, double snr_linear) {
    if (!(a1 > 0.0 && a2 > 0.0 && snr_linear > 0.0))
        throw domain_error("Tang-Zhang policy: a1, a2 and SNR must be positive");
    power_policy p;
    p.kind_ = policy_kind::tang_zhang;
    p.name_ = "tang_zhang";
    p.a1_ = a1;
    p.a2_ = a2;
    p.snr_ = snr_linear;
    return p;
}

power_policy power_policy::custom(std::function<double(double)> xi, std::string name) {
    if (!xi) throw domain_error("custom policy: empty function");
    power_policy p;
    p.kind_ = policy_kind::custom;
    p.name_ = std::move(name);
    p.custom_ = std::move(xi);
    return p;
}

double power_policy::cutoff() const {
    switch (kind_) {
        case policy_kind::water_filling: return nu0_ / gbar_;
        case policy_kind::tang_zhang: return a1_ / snr_;
        default: return 0.0;
    }
}

double power_policy::evaluate(double x) const {
    if (!(x >= 0.0)) throw domain_error("power policy: gain must be >= 0");
    switch (kind_) {
        case policy_kind::fixed: return snr_;
        case policy_kind::water_filling:
            if (x <= cutoff()) return 0.0;
            return 1.0 / nu0_ - 1.0 / (gbar_ * x);
        case policy_kind::tang_zhang: {
            if (x <= cutoff()) return 0.0;
            double p = 1.0 / (a2_ + 1.0);
            double gx = snr_ * x;
            return 1.0 / (std::pow(a1_, p) * std::pow(gx, a2_ * p)) - 1.0 / gx;
        }
        case policy_kind::custom: return custom_(x);
    }
    return 0.0;
}

snr_derivatives power_policy::received_snr(double x) const {
    if (!(x >= 0.0)) throw domain_error("power policy: gain must be >= 0");
    snr_derivatives d;
    switch (kind_) {
        case policy_kind::fixed:
            d.u = snr_ * x;
            d.du = snr_;
            return d;
        case policy_kind::water_filling:
            if (x <= cutoff()) return d;
            d.u = x / nu0_ - 1.0 / gbar_;
            d.du = 1.0 / nu0_;
            return d;
        case policy_kind::tang_zhang: {
            if (x <= cutoff()) return d;
            // u = C x^p - 1/gamma with p = 1/(a2+1), C = a1^{-p} gamma^{p-1}
            double p = 1.0 / (a2_ + 1.0);
            double c = std::pow(a1_, -p) * std::pow(snr_, p - 1.0);
            double xp = std::pow(x, p);
            d.u = c * xp - 1.0 / snr_;
            d.du = c * p * xp / x;
            d.d2u = c * p * (p - 1.0) * xp / (x * x);
            return d;
        }
        case policy_kind::custom: {
            auto u = [&](double t) { return custom_(t) * t; };
            double h = 1e-4 * std::max(x, 1e-12);
            double lo = std::max(x - h, 0.0), hi = x + h;
            double u0 = u(x), ul = u(lo), uh = u(hi);
            d.u = u0;
            d.du = (uh - ul) / (hi - lo);
            d.d2u = (x - h >= 0.0) ? (uh - 2.0 * u0 + ul) / (h * h) : 0.0;
            return d;
        }
    }
    return d;
}

double power_policy::invert_received_snr(double u_target) const {
    if (!(u_target >= 0.0)) throw domain_error("invert_received_snr: target must be >= 0");
    switch (kind_) {
        case policy_kind::fixed: return u_target / snr_;
        case policy_kind::water_filling: return nu0_ * (u_target + 1.0 / gbar_);
        case policy_kind::tang_zhang: {
            double p = 1.0 / (a2_ + 1.0);
            double c = std::pow(a1_, -p) * std::pow(snr_, p - 1.0);
            return std::pow((u_target + 1.0 / snr_) / c, 1.0 / p);
        }
        case policy_kind::custom: {
            if (u_target == 0.0) return 0.0;
            auto f = [&](double x) { return custom_(x) * x - u_target; };
            double hi = 1.0;
            int grow = 0;
            while (f(hi) < 0.0) {
                hi *= 2.0;
                if (++grow > 2000)
                    throw numeric_error("invert_received_snr: Xi(x) x never reaches the target");
            }
            return numeric::bisect(f, 0.0, hi);
        }
    }
    return 0.0;
}

double power_policy::level() const {
    switch (kind_) {
        case policy_kind::fixed: return snr_;
        case policy_kind::water_filling: return nu0_;
        case policy_kind::tang_zhang: return a1_;
        case policy_kind::custom: break;
    }
    throw precondition_error("custom policies have no level parameter");
}

power_policy power_policy::with_level(double level) const {
    switch (kind_) {
        case policy_kind::fixed: return fixed(level);
        case policy_kind::water_filling: return water_filling(level, gbar_);
        case policy_kind::tang_zhang: return tang_zhang(level, a2_, snr_);
        case policy_kind::custom: break;
    }
    throw precondition_error("custom policies have no level parameter");
}

admissibility_report check_admissible(const power_policy& policy, std::span<const double> grid) {
    admissibility_report rep;
    rep.worst_value = std::numeric_limits<double>::infinity();
    for (double x : grid) {
        if (!(x > 0.0)) throw domain_error("check_admissible: grid must be positive");
        double h = 1e-6 * x;
        double dxi = (policy.evaluate(x + h) - policy.evaluate(x - h)) / (2.0 * h);
        double v = policy.evaluate(x) + dxi * x;
        rep.worst_value = std::min(rep.worst_value, v);
        if (v < -1e-9 && !rep.first_violation) {
            rep.admissible = false;
            rep.first_violation = x;
        }
    }
    return rep;
}

double average_power(const power_policy& policy, const channel_model& model) {
    double c = policy.cutoff();
    std::vector<double> breaks;
    if (c > 0.0) breaks.push_back(c);
    return expect(model, [&](double x) { return policy.evaluate(x); }, breaks, c);
}

power_policy calibrate_average_power(const power_policy& tmpl, const channel_model& model,
                                     double target) {
    if (!(target > 0.0)) throw domain_error("calibrate_average_power: target must be > 0");
    if (tmpl.kind() == policy_kind::fixed || model.kind == channel_kind::awgn)
        return power_policy::fixed(target);
    if (tmpl.kind() == policy_kind::custom)
        throw precondition_error("calibrate_average_power: custom policies cannot be calibrated");

    // Mean power decreases in the level (nu0 or a1); bracket geometrically.
    auto excess = [&](double level) {
        return average_power(tmpl.with_level(level), model) - target;
    };
    double lo = tmpl.level(), hi = tmpl.level();
    int iters = 0;
    while (excess(lo) < 0.0) {
        lo *= 0.5;
        if (++iters > 200) throw numeric_error("calibrate_average_power: cannot bracket target");
    }
    while (excess(hi) > 0.0) {
        hi *= 2.0;
        if (++iters > 200) throw numeric_error("calibrate_average_power: cannot bracket target");
    }
    double level = numeric::bisect(excess, lo, hi, true, 200);
    return tmpl.with_level(level);
}

}  // namespace fbqos
