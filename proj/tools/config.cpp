#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"

namespace fbqos::cli {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw config_error(path + ": " + what);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Reads one JSON object, recording which keys were consumed so that
// finish() can reject anything left over.
class section {
public:
    section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!j_.contains(key)) fail(key_path(key), "required key is missing");
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) fail(key_path(key), "expected a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) fail(key_path(key), "expected a finite number");
        return d;
    }
    double number(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }
    double positive(const std::string& key) {
        double d = number(key);
        if (!(d > 0.0)) fail(key_path(key), "must be > 0");
        return d;
    }
    double positive(const std::string& key, double fallback) {
        return has(key) ? positive(key) : fallback;
    }

    std::uint64_t count(const std::string& key) {
        const json& v = raw(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
        fail(key_path(key), "expected a nonnegative integer");
    }
    std::uint64_t count(const std::string& key, std::uint64_t fallback) {
        return has(key) ? count(key) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) fail(key_path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) fail(key_path(key), "expected a string");
        return v.get<std::string>();
    }

    template <class E>
    E choice(const std::string& key, std::initializer_list<std::pair<const char*, E>> options) {
        std::string s = text(key);
        std::string allowed;
        for (const auto& [name, value] : options) {
            if (s == name) return value;
            allowed += allowed.empty() ? name : std::string(", ") + name;
        }
        fail(key_path(key), "unknown value '" + s + "' (allowed: " + allowed + ")");
    }
    template <class E>
    E choice(const std::string& key, E fallback,
             std::initializer_list<std::pair<const char*, E>> options) {
        return has(key) ? choice(key, options) : fallback;
    }

    section child(const std::string& key) { return section(raw(key), key_path(key)); }

    // A grid is an array of numbers or {"min", "max", "points", "spacing"}.
    std::vector<double> grid(const std::string& key) {
        const json& v = raw(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) fail(key_path(key), "grid entries must be numbers");
                out.push_back(v[i].get<double>());
            }
        } else {
            section g(v, key_path(key));
            double lo = g.number("min"), hi = g.number("max");
            std::uint64_t n = g.count("points");
            auto spacing = g.choice<int>("spacing", 0, {{"linear", 0}, {"log", 1}});
            g.finish();
            if (n < 1) fail(key_path(key), "points must be >= 1");
            if (n == 1) {
                out.push_back(lo);
            } else if (spacing == 1) {
                if (!(lo > 0.0 && hi > 0.0)) fail(key_path(key), "log grid needs positive ends");
                out = numeric::logspace(lo, hi, n);
            } else {
                out = numeric::linspace(lo, hi, n);
            }
        }
        if (out.empty()) fail(key_path(key), "grid is empty");
        for (std::size_t i = 1; i < out.size(); ++i)
            if (!(out[i] > out[i - 1])) fail(key_path(key), "grid must be strictly increasing");
        return out;
    }

    // Exactly one of <stem>_db and <stem>_linear.
    double snr(const std::string& stem) {
        bool db = has(stem + "_db"), lin = has(stem + "_linear");
        if (db == lin) fail(key_path(stem + "_db"), "give exactly one of " + stem + "_db and " + stem + "_linear");
        if (db) return db_to_linear(number(stem + "_db"));
        double v = number(stem + "_linear");
        if (!(v > 0.0)) fail(key_path(stem + "_linear"), "must be > 0");
        return v;
    }
    std::vector<double> snr_grid(const std::string& stem) {
        bool db = has(stem + "_db"), lin = has(stem + "_linear");
        if (db == lin) fail(key_path(stem + "_db"), "give exactly one of " + stem + "_db and " + stem + "_linear");
        std::vector<double> g = grid(db ? stem + "_db" : stem + "_linear");
        if (db)
            for (double& x : g) x = db_to_linear(x);
        for (double x : g)
            if (!(x > 0.0)) fail(key_path(stem + "_linear"), "SNR must be > 0");
        return g;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(key_path(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

channel_model parse_channel(section s) {
    int slots = static_cast<int>(s.count("frame_slots", 1));
    if (slots < 1) fail(s.key_path("frame_slots"), "must be >= 1");
    auto kind = s.choice<channel_kind>("model", {{"awgn", channel_kind::awgn},
                                                 {"rayleigh", channel_kind::rayleigh},
                                                 {"nakagami", channel_kind::nakagami},
                                                 {"rayleigh_diversity", channel_kind::rayleigh_diversity},
                                                 {"two_point", channel_kind::two_point}});
    channel_model m;
    switch (kind) {
        case channel_kind::awgn: m = channel_model::awgn(slots); break;
        case channel_kind::rayleigh:
            m = channel_model::rayleigh(s.positive("omega_linear", 1.0), slots);
            break;
        case channel_kind::nakagami: {
            double shape = s.number("m");
            if (!(shape >= 0.5)) fail(s.key_path("m"), "Nakagami m must be >= 0.5");
            m = channel_model::nakagami(shape, s.positive("omega_linear", 1.0), slots);
            break;
        }
        case channel_kind::rayleigh_diversity: {
            std::uint64_t k = s.count("kappa");
            if (k < 1 || k > 1000) fail(s.key_path("kappa"), "must lie in [1, 1000]");
            m = channel_model::rayleigh_diversity(static_cast<int>(k), slots);
            break;
        }
        case channel_kind::two_point: {
            std::vector<double> g = s.grid("gains_linear");
            if (g.size() != 2 || !(g[0] > 0.0)) fail(s.key_path("gains_linear"), "expected two positive gains");
            double p = s.number("prob_low");
            if (!(p > 0.0 && p < 1.0)) fail(s.key_path("prob_low"), "must lie in (0, 1)");
            m = channel_model::two_point(g[0], g[1], p, slots);
            break;
        }
    }
    s.finish();
    return m;
}

void parse_policy(section s, run_config& cfg) {
    auto kind = s.choice<policy_kind>("kind", {{"fixed", policy_kind::fixed},
                                               {"water_filling", policy_kind::water_filling},
                                               {"tang_zhang", policy_kind::tang_zhang}});
    switch (kind) {
        case policy_kind::fixed: cfg.policy = power_policy::fixed(s.snr("snr")); break;
        case policy_kind::water_filling: {
            double gbar = s.positive("gbar_linear", 1.0);
            if (s.has("nu0")) {
                cfg.policy = power_policy::water_filling(s.positive("nu0"), gbar);
            } else {
                cfg.policy = power_policy::water_filling(1.0, gbar);
                cfg.policy_mean_snr = s.snr("mean_snr");
            }
            break;
        }
        case policy_kind::tang_zhang: {
            double a2 = s.number("a2");
            if (!(a2 >= 0.0)) fail(s.key_path("a2"), "must be >= 0");
            double snr = s.snr("snr");
            if (s.has("a1")) {
                cfg.policy = power_policy::tang_zhang(s.positive("a1"), a2, snr);
            } else {
                cfg.policy = power_policy::tang_zhang(1.0, a2, snr);
                cfg.policy_mean_snr = s.snr("mean_snr");
            }
            break;
        }
        case policy_kind::custom: break;
    }
    s.finish();
}

void parse_code(section s, run_config& cfg) {
    fbc_params p;
    p.blocklength = static_cast<double>(s.count("blocklength_uses"));
    if (!(p.blocklength >= 1.0)) fail(s.key_path("blocklength_uses"), "must be >= 1");
    p.epsilon = s.number("error_probability");
    if (!(p.epsilon > 0.0 && p.epsilon <= 0.5))
        fail(s.key_path("error_probability"), "must lie in (0, 0.5]");
    cfg.arq = s.boolean("arq", false);
    cfg.below_cutoff = s.choice<zero_power_rate>(
        "below_cutoff_rate", zero_power_rate::half_log2_blocklength,
        {{"half_log2_blocklength", zero_power_rate::half_log2_blocklength},
         {"zero", zero_power_rate::zero}});
    s.finish();
    cfg.code = p;
}

arrival_spec parse_arrival(section s) {
    auto kind = s.choice<arrival_kind>("kind", {{"deterministic", arrival_kind::deterministic},
                                                {"bernoulli", arrival_kind::bernoulli_packet},
                                                {"poisson", arrival_kind::poisson_bits}});
    arrival_spec a;
    bool relative = s.has("load_fraction");
    if (relative) {
        a.load_fraction = s.number("load_fraction");
        if (!(*a.load_fraction > 0.0)) fail(s.key_path("load_fraction"), "must be > 0");
    }
    try {
        switch (kind) {
            case arrival_kind::deterministic:
                a.process = arrival_process::deterministic(relative ? 1.0 : s.number("bits_per_slot"));
                break;
            case arrival_kind::bernoulli_packet: {
                double p = s.number("probability");
                a.process = arrival_process::bernoulli_packet(relative ? 1.0 : s.positive("packet_bits"), p);
                break;
            }
            case arrival_kind::poisson_bits:
                a.process = arrival_process::poisson_bits(relative ? 1.0 : s.positive("mean_bits_per_slot"));
                break;
        }
    } catch (const domain_error& e) {
        fail(s.path(), e.what());
    }
    s.finish();
    return a;
}

psi_schedule parse_schedule(section& parent) {
    psi_schedule ps;
    {
        section s = parent.child("psi");
        ps.form = s.choice<psi_form>("form", {{"constant", psi_form::constant},
                                              {"polylog", psi_form::polylog},
                                              {"exp_qinv", psi_form::exp_qinv},
                                              {"table", psi_form::table}});
        ps.c0 = s.positive("c0", 1.0);
        switch (ps.form) {
            case psi_form::constant: ps.value = s.number("blocklength_uses"); break;
            case psi_form::polylog:
                ps.scale = s.positive("scale_uses", 1.0);
                ps.power = s.number("power", 2.0);
                break;
            case psi_form::exp_qinv: ps.margin = s.positive("margin", 1.0); break;
            case psi_form::table:
                ps.table_snr = s.snr_grid("table_snr");
                ps.table_psi = s.grid("table_blocklength_uses");
                break;
        }
        s.finish();
    }
    {
        section s = parent.child("epsilon");
        ps.eps_form = s.choice<epsilon_form>("form", {{"fixed", epsilon_form::fixed},
                                                      {"power_law", epsilon_form::power_law}});
        if (ps.eps_form == epsilon_form::fixed)
            ps.eps0 = s.number("value");
        else
            ps.beta = s.positive("beta");
        s.finish();
    }
    try {
        ps.validate();
    } catch (const domain_error& e) {
        fail(parent.path(), e.what());
    }
    return ps;
}

}  // namespace

arrival_process arrival_spec::resolve(double mean_service_bits) const {
    if (!load_fraction) return process;
    return process.with_mean(*load_fraction * mean_service_bits);
}

service_context run_config::service() const {
    if (!channel) throw config_error("channel: section is required for this command");
    if (!policy) throw config_error("policy: section is required for this command");
    if (!code) throw config_error("code: section is required for this command");
    service_context ctx;
    ctx.channel = *channel;
    ctx.fbc = *code;
    ctx.arq = arq;
    ctx.below_cutoff = below_cutoff;
    ctx.policy = policy_mean_snr ? calibrate_average_power(*policy, *channel, *policy_mean_snr)
                                 : *policy;
    ctx.fbc.snr = ctx.policy.kind() == policy_kind::fixed ? ctx.policy.snr() : 1.0;
    return ctx;
}

run_config parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    section root(doc, "");
    run_config cfg;
    if (root.has("channel")) cfg.channel = parse_channel(root.child("channel"));
    if (root.has("policy")) parse_policy(root.child("policy"), cfg);
    if (root.has("code")) parse_code(root.child("code"), cfg);
    if (root.has("arrival")) cfg.arrival = parse_arrival(root.child("arrival"));
    if (root.has("seed")) cfg.seed = root.count("seed");
    if (root.has("output_dir")) cfg.output_dir = root.text("output_dir");

    if (root.has("ec")) {
        section s = root.child("ec");
        ec_section e;
        e.theta_per_bit = s.grid("theta_per_bit");
        e.mc_frames = s.count("mc_frames", e.mc_frames);
        if (e.mc_frames < 2) fail(s.key_path("mc_frames"), "must be >= 2");
        if (s.has("laplace_variants")) {
            const json& v = s.raw("laplace_variants");
            if (!v.is_array()) fail(s.key_path("laplace_variants"), "expected an array");
            for (const json& x : v) {
                std::string name = x.is_string() ? x.get<std::string>() : "";
                if (name == "plain") e.laplace_variants.push_back(laplace_variant::plain);
                else if (name == "truncated") e.laplace_variants.push_back(laplace_variant::truncated);
                else if (name == "arq") e.laplace_variants.push_back(laplace_variant::arq);
                else fail(s.key_path("laplace_variants"), "entries must be plain, truncated or arq");
            }
        }
        e.prefactor = s.choice<truncated_prefactor>(
            "truncated_prefactor", truncated_prefactor::per_frame,
            {{"per_frame", truncated_prefactor::per_frame}, {"printed", truncated_prefactor::printed}});
        s.finish();
        for (double t : e.theta_per_bit)
            if (!(t > 0.0)) fail("ec.theta_per_bit", "theta must be > 0");
        cfg.ec = e;
    }
    if (root.has("slope")) {
        section s = root.child("slope");
        slope_section e;
        e.theta_per_bit = s.grid("theta_per_bit");
        e.snr_linear = s.snr_grid("snr");
        s.finish();
        for (double t : e.theta_per_bit)
            if (!(t > 0.0)) fail("slope.theta_per_bit", "theta must be > 0");
        if (e.snr_linear.size() < 3) fail("slope", "SNR grid needs at least 3 points");
        cfg.slope = e;
    }
    if (root.has("gains")) {
        section s = root.child("gains");
        gains_section e;
        e.rho = s.positive("theta_times_blocklength");
        e.snr_linear = s.snr_grid("snr");
        e.schedule = parse_schedule(s);
        s.finish();
        if (e.snr_linear.size() < 2 || !(e.snr_linear.front() > 1.0))
            fail("gains", "SNR grid needs at least 2 points above 0 dB");
        cfg.gains = e;
    }
    if (root.has("simulate")) {
        section s = root.child("simulate");
        simulate_section e;
        e.slots = s.count("slots", e.slots);
        e.warmup_slots = s.count("warmup_slots", e.warmup_slots);
        e.replications = static_cast<int>(s.count("replications", 1));
        e.batches = static_cast<int>(s.count("batches", 100));
        e.queue_thresholds_bits = s.grid("queue_thresholds_bits");
        e.delay_thresholds_slots = s.grid("delay_thresholds_slots");
        e.busy = s.choice<busy_convention>("busy_probability", busy_convention::high_load,
                                           {{"high_load", busy_convention::high_load},
                                            {"load_ratio", busy_convention::load_ratio}});
        e.tolerances.decay = s.positive("decay_tolerance", e.tolerances.decay);
        e.tolerances.delay_factor = s.positive("delay_factor", e.tolerances.delay_factor);
        s.finish();
        cfg.simulate = e;
    }
    if (root.has("tradeoff")) {
        section s = root.child("tradeoff");
        tradeoff_section e;
        e.snr_linear = s.snr("snr");
        e.blocklength = static_cast<double>(s.count("blocklength_uses"));
        if (!(e.blocklength >= 1.0)) fail(s.key_path("blocklength_uses"), "must be >= 1");
        e.queue_threshold_bits = s.positive("queue_threshold_bits");
        e.chi_threshold = s.grid("chi_threshold");
        s.finish();
        for (double c : e.chi_threshold)
            if (!(c > 0.0 && c <= 1.0)) fail("tradeoff.chi_threshold", "entries must lie in (0, 1]");
        cfg.tradeoff = e;
    }
    if (root.has("check")) {
        section s = root.child("check");
        check_section e;
        e.snr_linear = s.snr_grid("snr");
        e.schedule = parse_schedule(s);
        e.trend_tolerance = s.positive("trend_tolerance", e.trend_tolerance);
        s.finish();
        if (e.snr_linear.size() < 2 || !(e.snr_linear.front() > 1.0))
            fail("check", "SNR grid needs at least 2 points above 0 dB");
        cfg.check = e;
    }
    root.finish();

    try {
        if (cfg.channel) cfg.channel->validate();
        if (cfg.code) cfg.code->validate();
    } catch (const domain_error& e) {
        throw config_error(e.what());
    }
    return cfg;
}

run_config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error(path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace fbqos::cli
