#include "fbqos/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"

namespace fbqos {

std::string to_string(channel_kind k) {
    switch (k) {
        case channel_kind::awgn: return "awgn";
        case channel_kind::rayleigh: return "rayleigh";
        case channel_kind::nakagami: return "nakagami";
        case channel_kind::rayleigh_diversity: return "rayleigh_diversity";
        case channel_kind::two_point: return "two_point";
    }
    return "unknown";
}

channel_model channel_model::awgn(int frame_slots) {
    channel_model c;
    c.kind = channel_kind::awgn;
    c.frame_slots = frame_slots;
    c.validate();
    return c;
}

channel_model channel_model::rayleigh(double omega, int frame_slots) {
    channel_model c;
    c.kind = channel_kind::rayleigh;
    c.omega = omega;
    c.frame_slots = frame_slots;
    c.validate();
    return c;
}

channel_model channel_model::nakagami(double m, double omega, int frame_slots) {
    channel_model c;
    c.kind = channel_kind::nakagami;
    c.m = m;
    c.omega = omega;
    c.frame_slots = frame_slots;
    c.validate();
    return c;
}

channel_model channel_model::rayleigh_diversity(int kappa, int frame_slots) {
    channel_model c;
    c.kind = channel_kind::rayleigh_diversity;
    c.kappa = kappa;
    c.m = kappa;
    c.omega = kappa;
    c.frame_slots = frame_slots;
    c.validate();
    return c;
}

channel_model channel_model::two_point(double g_lo, double g_hi, double p_lo, int frame_slots) {
    channel_model c;
    c.kind = channel_kind::two_point;
    c.gains[0] = g_lo;
    c.gains[1] = g_hi;
    c.probs[0] = p_lo;
    c.probs[1] = 1.0 - p_lo;
    c.frame_slots = frame_slots;
    c.validate();
    return c;
}

void channel_model::validate() const {
    if (frame_slots < 1) throw domain_error("channel: frame_slots must be >= 1");
    switch (kind) {
        case channel_kind::awgn: break;
        case channel_kind::rayleigh:
            if (!(omega > 0.0)) throw domain_error("channel: omega must be > 0");
            break;
        case channel_kind::nakagami:
            if (!(m >= 0.5)) throw domain_error("channel: Nakagami m must be >= 0.5");
            if (!(omega > 0.0)) throw domain_error("channel: omega must be > 0");
            break;
        case channel_kind::rayleigh_diversity:
            if (kappa < 1) throw domain_error("channel: kappa must be a positive integer");
            break;
        case channel_kind::two_point:
            for (int i = 0; i < 2; ++i) {
                if (!(gains[i] >= 0.0)) throw domain_error("channel: gains must be >= 0");
                if (!(probs[i] >= 0.0 && probs[i] <= 1.0))
                    throw domain_error("channel: probabilities must lie in [0, 1]");
            }
            if (std::abs(probs[0] + probs[1] - 1.0) > 1e-12)
                throw domain_error("channel: probabilities must sum to 1");
            break;
    }
}

bool channel_model::continuous() const {
    return kind != channel_kind::awgn && kind != channel_kind::two_point;
}

double channel_model::shape() const {
    switch (kind) {
        case channel_kind::rayleigh: return 1.0;
        case channel_kind::nakagami: return m;
        case channel_kind::rayleigh_diversity: return kappa;
        default: throw precondition_error("channel: " + to_string(kind) + " has no density");
    }
}

double channel_model::scale() const {
    switch (kind) {
        case channel_kind::rayleigh: return omega;
        case channel_kind::nakagami: return omega / m;
        case channel_kind::rayleigh_diversity: return 1.0;
        default: throw precondition_error("channel: " + to_string(kind) + " has no density");
    }
}

std::vector<atom> atoms(const channel_model& model) {
    if (model.kind == channel_kind::awgn) return {{1.0, 1.0}};
    if (model.kind == channel_kind::two_point)
        return {{model.gains[0], model.probs[0]}, {model.gains[1], model.probs[1]}};
    return {};
}

double pdf(const channel_model& model, double x) {
    if (!(x >= 0.0)) throw domain_error("pdf: x must be >= 0");
    model.validate();
    if (!model.continuous())
        throw precondition_error("pdf: " + to_string(model.kind) + " gain is a point mass");
    double k = model.shape(), th = model.scale();
    if (x == 0.0) {
        if (k < 1.0) return std::numeric_limits<double>::infinity();
        if (k == 1.0) return 1.0 / th;
        return 0.0;
    }
    double lp = (k - 1.0) * std::log(x / th) - x / th - std::lgamma(k) - std::log(th);
    return std::exp(lp);
}

double cdf(const channel_model& model, double x) {
    model.validate();
    if (x < 0.0) return 0.0;
    if (!model.continuous()) {
        double c = 0.0;
        for (const atom& a : atoms(model))
            if (a.gain <= x) c += a.prob;
        return c;
    }
    if (x == 0.0) return 0.0;
    return boost::math::gamma_p(model.shape(), x / model.scale());
}

double mean(const channel_model& model) {
    model.validate();
    if (!model.continuous()) {
        double s = 0.0;
        for (const atom& a : atoms(model)) s += a.gain * a.prob;
        return s;
    }
    return model.shape() * model.scale();
}

double variance(const channel_model& model) {
    model.validate();
    if (!model.continuous()) {
        double mu = mean(model), s = 0.0;
        for (const atom& a : atoms(model)) s += a.prob * (a.gain - mu) * (a.gain - mu);
        return s;
    }
    return model.shape() * model.scale() * model.scale();
}

double quantile(const channel_model& model, double p) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("quantile: p must lie in (0, 1)");
    if (!model.continuous()) {
        std::vector<atom> a = atoms(model);
        std::sort(a.begin(), a.end(), [](atom l, atom r) { return l.gain < r.gain; });
        double c = 0.0;
        for (const atom& t : a) {
            c += t.prob;
            if (c >= p) return t.gain;
        }
        return a.back().gain;
    }
    return boost::math::gamma_p_inv(model.shape(), p) * model.scale();
}

double upper_quantile(const channel_model& model, double q) {
    if (!(q > 0.0 && q < 1.0)) throw domain_error("upper_quantile: q must lie in (0, 1)");
    if (!model.continuous()) return quantile(model, 1.0 - q);
    return boost::math::gamma_q_inv(model.shape(), q) * model.scale();
}

double expect(const channel_model& model, const std::function<double(double)>& g,
              const std::vector<double>& breaks, double lo, double* error) {
    model.validate();
    if (!model.continuous()) {
        double s = 0.0;
        for (const atom& a : atoms(model))
            if (a.gain >= lo && a.prob > 0.0) s += a.prob * g(a.gain);
        if (error) *error = 0.0;
        return s;
    }
    // Tail masses beyond these quantiles are below 1e-250 and the integrands
    // used here are bounded, so truncation is far below quadrature error.
    double x_lo = std::max({quantile(model, 1e-250), 1e-290, lo});
    double x_hi = upper_quantile(model, 1e-250);
    if (!(x_hi > x_lo)) {
        if (error) *error = 0.0;
        return 0.0;
    }
    std::vector<double> b = numeric::decade_breaks(x_lo, x_hi, breaks);
    const double k = model.shape(), th = model.scale();
    const double log_norm = std::lgamma(k) + std::log(th);
    auto integrand = [&](double x) {
        double v = g(x);
        if (v == 0.0) return 0.0;
        return v * std::exp((k - 1.0) * std::log(x / th) - x / th - log_norm);
    };
    numeric::integral r = numeric::integrate_panels(integrand, b);
    if (error) *error = r.error;
    return r.value;
}

gain_sampler::gain_sampler(const channel_model& model, std::uint64_t seed)
    : model_(model), rng_(seed) {
    model_.validate();
    if (model_.kind == channel_kind::rayleigh || model_.kind == channel_kind::nakagami)
        gamma_ = std::gamma_distribution<double>(model_.shape(), model_.scale());
}

double gain_sampler::next() {
    switch (model_.kind) {
        case channel_kind::awgn: return 1.0;
        case channel_kind::rayleigh:
        case channel_kind::nakagami: return gamma_(rng_);
        case channel_kind::rayleigh_diversity: {
            double s = 0.0;
            for (int i = 0; i < model_.kappa; ++i) s += expo_(rng_);
            return s;
        }
        case channel_kind::two_point:
            return unif_(rng_) < model_.probs[0] ? model_.gains[0] : model_.gains[1];
    }
    return 1.0;
}

std::vector<double> sample_frames(const channel_model& model, std::size_t n_frames,
                                  std::uint64_t seed) {
    gain_sampler s(model, seed);
    std::vector<double> out(n_frames);
    for (double& x : out) x = s.next();
    return out;
}

std::vector<double> expand_to_slots(const std::vector<double>& frames, int frame_slots) {
    std::vector<double> out;
    out.reserve(frames.size() * static_cast<std::size_t>(frame_slots));
    for (double g : frames)
        for (int t = 0; t < frame_slots; ++t) out.push_back(g);
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace fbqos
