#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "fbqos/error.hpp"
#include "fbqos/specfun.hpp"
#include "output.hpp"

namespace fbqos::cli {

using ojson = nlohmann::ordered_json;

namespace {

struct options {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string method = "all";
};

struct context {
    run_config cfg;
    options opt;
    std::string dir;
    std::ostream& out;
    std::ostream& err;

    std::uint64_t seed() const { return opt.seed ? *opt.seed : cfg.seed; }
    std::string path(const std::string& name) const {
        return (std::filesystem::path(dir) / name).string();
    }
};

// Runs body(i) for i in [0, n) on up to `jobs` threads; the first exception
// is rethrown after all threads finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
    std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!first) first = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

ojson describe(const service_context& ctx) {
    ojson j;
    j["channel"] = to_string(ctx.channel.kind);
    j["frame_slots"] = ctx.channel.frame_slots;
    j["policy"] = to_string(ctx.policy.kind());
    j["policy_level"] = ctx.policy.level();
    j["blocklength_uses"] = ctx.fbc.blocklength;
    j["error_probability"] = ctx.fbc.epsilon;
    j["arq"] = ctx.arq;
    return j;
}

std::string error_status(const char* kind, const std::exception& e) {
    return std::string(kind) + ": " + e.what();
}

// ---------------------------------------------------------------- ec

struct ec_row {
    std::optional<double> theta;
    std::string method;
    double value = NAN, normalized = NAN, error = NAN;
    std::string status = "ok";
};

std::vector<laplace_variant> default_variants(const service_context& ctx) {
    if (ctx.arq) return {laplace_variant::arq};
    if (ctx.policy.cutoff() > 0.0) return {laplace_variant::truncated};
    return {laplace_variant::plain};
}

template <class F>
void fill(ec_row& row, F&& compute) {
    try {
        compute(row);
    } catch (const precondition_error& e) {
        row.status = error_status("precondition_error", e);
    } catch (const numeric_error& e) {
        row.status = error_status("numeric_error", e);
    }
}

int cmd_ec(context& c) {
    if (!c.cfg.ec) throw config_error("ec: section is required for this command");
    const ec_section& sec = *c.cfg.ec;
    service_context ctx = c.cfg.service();
    bool want_quad = c.opt.method == "all" || c.opt.method == "quadrature";
    bool want_mc = c.opt.method == "all" || c.opt.method == "mc";
    bool want_lap = c.opt.method == "all" || c.opt.method == "laplace";
    std::vector<laplace_variant> variants =
        sec.laplace_variants.empty() ? default_variants(ctx) : sec.laplace_variants;

    // Without fading and ARQ the EC is the same at every theta: one row per method.
    bool constant = ctx.channel.kind == channel_kind::awgn && !ctx.arq;
    std::vector<double> thetas = constant ? std::vector<double>{sec.theta_per_bit.front()}
                                          : sec.theta_per_bit;
    std::size_t per_theta = (want_quad ? 1 : 0) + (want_mc ? 1 : 0) + (want_lap ? variants.size() : 0);
    std::vector<ec_row> rows(thetas.size() * per_theta);

    const std::uint64_t seed = c.seed();
    parallel_for(thetas.size(), c.opt.jobs, [&](std::size_t i) {
        double th = thetas[i];
        std::size_t k = i * per_theta;
        auto base = [&](ec_row& r, const std::string& method) {
            if (!constant) r.theta = th;
            r.method = method;
        };
        if (want_quad) {
            ec_row& r = rows[k++];
            base(r, "quadrature");
            fill(r, [&](ec_row& row) {
                ec_estimate e = effective_capacity_quadrature(ctx, th);
                row.value = e.value;
                row.normalized = e.normalized;
                row.error = e.error;
            });
        }
        if (want_mc) {
            ec_row& r = rows[k++];
            base(r, "mc");
            fill(r, [&](ec_row& row) {
                ec_estimate e = effective_capacity_montecarlo(ctx, th, sec.mc_frames, derive_seed(seed, i));
                row.value = e.value;
                row.normalized = e.normalized;
                row.error = e.error;
            });
        }
        if (want_lap) {
            for (laplace_variant v : variants) {
                ec_row& r = rows[k++];
                base(r, to_string(v));
                fill(r, [&](ec_row& row) {
                    laplace_result lr;
                    switch (v) {
                        case laplace_variant::plain:
                            lr = ec_laplace(ctx.channel, ctx.policy, ctx.fbc, th);
                            break;
                        case laplace_variant::truncated:
                            lr = ec_laplace_truncated(ctx.channel, ctx.policy, ctx.fbc, th,
                                                      sec.prefactor, ctx.below_cutoff);
                            break;
                        case laplace_variant::arq:
                            lr = ec_laplace_arq(ctx.channel, ctx.policy, ctx.fbc, th,
                                                ctx.arq ? ctx.fbc.epsilon : 0.0);
                            break;
                    }
                    row.value = lr.ec_value;
                    row.normalized = lr.normalized;
                });
            }
        }
    });

    csv_table t({"theta_per_bit", "theta_times_blocklength", "method", "ec_bits_per_slot",
                 "ec_bits_per_use", "error_bits_per_slot", "status"});
    std::size_t failures = 0;
    for (const ec_row& r : rows) {
        t.row();
        if (r.theta)
            t.add(*r.theta).add(*r.theta * ctx.fbc.blocklength);
        else
            t.add("").add("");
        t.add(r.method).add(r.value).add(r.normalized).add(r.error).add(r.status);
        if (r.status != "ok") ++failures;
    }
    write_atomic(c.path("ec.csv"), t.str());

    ojson rep;
    rep["command"] = "ec";
    rep["setup"] = describe(ctx);
    rep["mean_service_bits_per_slot"] = json_number(mean_service_bits(ctx));
    rep["method"] = c.opt.method;
    rep["theta_independent"] = constant;
    rep["rows"] = rows.size();
    rep["rows_with_errors"] = failures;
    write_atomic(c.path("ec_report.json"), json_text(rep));
    c.out << "ec: " << rows.size() << " rows (" << failures << " with method errors) -> "
          << c.path("ec.csv") << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- slope

int cmd_slope(context& c) {
    if (!c.cfg.slope) throw config_error("slope: section is required for this command");
    if (!c.cfg.channel) throw config_error("channel: section is required for this command");
    if (!c.cfg.code) throw config_error("code: section is required for this command");
    const slope_section& sec = *c.cfg.slope;
    const channel_model& ch = *c.cfg.channel;
    const fbc_params& code = *c.cfg.code;

    std::vector<slope_fit> fits(sec.theta_per_bit.size());
    parallel_for(fits.size(), c.opt.jobs, [&](std::size_t i) {
        fits[i] = empirical_slope(ch, code, sec.theta_per_bit[i], sec.snr_linear);
    });

    csv_table summary({"theta_per_bit", "theta_times_blocklength", "slope", "slope_theory", "r2",
                       "endpoint_derivative", "ill_conditioned"});
    csv_table points({"theta_per_bit", "snr_db", "lambda_bits_per_use"});
    for (std::size_t i = 0; i < fits.size(); ++i) {
        double th = sec.theta_per_bit[i];
        const slope_fit& f = fits[i];
        summary.row()
            .add(th)
            .add(th * code.blocklength)
            .add(f.slope)
            .add(theoretical_slope(ch, th * code.blocklength))
            .add(f.r2)
            .add(f.endpoint_derivative)
            .add(f.ill_conditioned ? "true" : "false");
        if (f.ill_conditioned)
            c.err << "warning: slope fit at theta = " << th << " has R^2 = " << f.r2 << " < 0.999\n";
        for (std::size_t k = 0; k < f.lambda.size(); ++k)
            points.row().add(th).add(to_db(sec.snr_linear[k])).add(f.lambda[k]);
    }
    write_atomic(c.path("slope.csv"), summary.str());
    write_atomic(c.path("slope_points.csv"), points.str());
    c.out << "slope: " << fits.size() << " fits -> " << c.path("slope.csv") << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- gains / check

ojson schedule_json(const psi_schedule& s) {
    ojson j;
    j["psi_form"] = to_string(s.form);
    j["epsilon_form"] = to_string(s.eps_form);
    if (s.eps_form == epsilon_form::fixed)
        j["epsilon"] = s.eps0;
    else
        j["beta"] = s.beta;
    j["c0"] = s.c0;
    return j;
}

ojson check_json(const psi_check& chk) {
    auto cond = [](const condition_result& r) {
        ojson j;
        j["pass"] = r.pass;
        j["worst"] = json_number(r.worst);
        return j;
    };
    ojson j;
    j["fixed_eps_psi_over_varsigma1"] = cond(chk.fixed_eps);
    j["power_law_margin_psi_eps2_over_varsigma2"] = cond(chk.power_law_margin);
    j["power_law_exp_qinv_trend"] = cond(chk.power_law_exp);
    j["power_law_qinv_trend"] = cond(chk.power_law_qinv);
    j["power_law_admissible"] = chk.power_law_ok();
    return j;
}

int cmd_gains(context& c) {
    if (!c.cfg.gains) throw config_error("gains: section is required for this command");
    if (!c.cfg.channel) throw config_error("channel: section is required for this command");
    const gains_section& sec = *c.cfg.gains;
    gain_report g = gains_report(*c.cfg.channel, sec.schedule, sec.rho, sec.snr_linear);
    ojson rep;
    rep["command"] = "gains";
    rep["channel"] = to_string(c.cfg.channel->kind);
    rep["frame_slots"] = c.cfg.channel->frame_slots;
    rep["theta_times_blocklength"] = sec.rho;
    rep["schedule"] = schedule_json(sec.schedule);
    rep["snr_top_db"] = to_db(g.snr_top);
    rep["blocklength_top_uses"] = g.blocklength_top;
    rep["epsilon_top"] = g.epsilon_top;
    rep["zeta"] = json_number(g.zeta);
    rep["varpi"] = json_number(g.varpi);
    rep["tau"] = json_number(g.tau);
    rep["c4"] = json_number(g.c4);
    rep["slope_theory"] = g.slope_theory;
    rep["residual_conservation"] = json_number(g.residual_conservation);
    rep["residual_tau"] = json_number(g.residual_tau);
    write_atomic(c.path("gains.json"), json_text(rep));
    c.out << "gains: zeta = " << format_number(g.zeta) << ", residual "
          << format_number(g.residual_conservation) << " -> " << c.path("gains.json") << "\n";
    return exit_ok;
}

int cmd_check(context& c) {
    if (!c.cfg.check) throw config_error("check: section is required for this command");
    const check_section& sec = *c.cfg.check;
    psi_check chk = check_psi(sec.schedule, sec.snr_linear, sec.trend_tolerance);
    varsigma_values vs = varsigma_thresholds(sec.schedule.c0, 0.5);
    ojson rep;
    rep["command"] = "check";
    rep["schedule"] = schedule_json(sec.schedule);
    rep["varsigma2"] = vs.varsigma2;
    rep["snr_min_db"] = to_db(sec.snr_linear.front());
    rep["snr_max_db"] = to_db(sec.snr_linear.back());
    rep["trend_tolerance"] = sec.trend_tolerance;
    rep["verdicts"] = check_json(chk);
    write_atomic(c.path("check.json"), json_text(rep));
    c.out << "check: fixed-eps conditions " << (chk.fixed_eps.pass ? "pass" : "fail")
          << ", power-law conditions "
          << (chk.power_law_ok() ? "pass" : "fail") << " -> " << c.path("check.json") << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- simulate

std::string tail_csv(const tail_estimate& t) {
    csv_table tab({"threshold", "count", "probability", "ci_lo", "ci_hi"});
    for (const tail_row& r : t.rows)
        tab.row().add(r.threshold).add_count(r.count).add(r.probability).add(r.ci_lo).add(r.ci_hi);
    return tab.str();
}

ojson tail_json(const tail_estimate& t) {
    ojson j;
    j["samples"] = t.samples;
    j["decay_rate"] = json_number(t.decay_rate);
    j["decay_stderr"] = json_number(t.decay_stderr);
    j["fit_r2"] = json_number(t.fit_r2);
    j["fit_points"] = t.fit_points;
    return j;
}

int cmd_simulate(context& c) {
    if (!c.cfg.simulate) throw config_error("simulate: section is required for this command");
    if (!c.cfg.arrival) throw config_error("arrival: section is required for this command");
    const simulate_section& sec = *c.cfg.simulate;
    service_context ctx = c.cfg.service();
    double es = mean_service_bits(ctx);
    arrival_process arr = c.cfg.arrival->resolve(es);

    sim_config sc;
    sc.service = ctx;
    sc.arrival = arr;
    sc.n_slots = sec.slots;
    sc.warmup = sec.warmup_slots;
    sc.seed = c.seed();
    sc.replications = sec.replications;
    sc.jobs = c.opt.jobs;
    sc.batches = sec.batches;
    sc.queue_thresholds_bits = sec.queue_thresholds_bits;
    sc.delay_thresholds_slots = sec.delay_thresholds_slots;
    try {
        sc.validate();
    } catch (const domain_error& e) {
        throw config_error(std::string("simulate: ") + e.what());
    }

    std::optional<qos_solution> sol;
    ojson rep;
    rep["command"] = "simulate";
    rep["setup"] = describe(ctx);
    rep["arrival"] = to_string(arr.kind);
    rep["mean_arrival_bits_per_slot"] = arr.mean();
    rep["mean_service_bits_per_slot"] = es;
    if (arr.mean() < es) {
        sol = solve_qos_exponent(arr, ctx);
        rep["theta_bounded"] = sol->bounded;
        rep["theta_per_bit"] = sol->bounded ? json_number(sol->theta) : ojson(nullptr);
    } else {
        c.err << "warning: mean arrival " << arr.mean() << " >= mean service " << es
              << "; the queue is unstable and no exponent exists\n";
        rep["theta_bounded"] = false;
        rep["theta_per_bit"] = nullptr;
    }

    sim_result res = simulate(sc);
    write_atomic(c.path("queue_tail.csv"), tail_csv(res.queue));
    write_atomic(c.path("delay_tail.csv"), tail_csv(res.delay));

    ojson stats;
    stats["mean_arrival_bits"] = res.stats.mean_arrival_bits;
    stats["mean_offered_service_bits"] = res.stats.mean_service_bits;
    stats["mean_departed_bits"] = res.stats.mean_departed_bits;
    stats["mean_queue_bits"] = res.stats.mean_queue_bits;
    stats["max_queue_bits"] = res.stats.max_queue_bits;
    stats["censored_delays"] = res.stats.censored_delays;
    stats["unstable"] = res.stats.unstable;
    rep["stats"] = stats;
    rep["queue_tail"] = tail_json(res.queue);
    rep["delay_tail"] = tail_json(res.delay);

    if (sol && sol->bounded) {
        qos_state st;
        st.theta = sol->theta;
        st.blocklength = ctx.fbc.blocklength;
        st.eta = busy_probability(sec.busy, arr.mean(), es);
        rep["eta"] = st.eta;
        rep["alpha_a_bits_per_slot"] = sol->alpha_a;
        try {
            ldt_comparison cmp = compare_ldt(res, st, sol->alpha_a, sec.tolerances);
            ojson j;
            j["decay_ratio"] = json_number(cmp.decay_ratio);
            j["decay_pass"] = cmp.decay_pass;
            j["delay_pass"] = cmp.delay_pass;
            j["delay_rows_checked"] = cmp.delay_rows_checked;
            ojson rows = ojson::array();
            for (const ldt_row& r : cmp.delay) {
                ojson x;
                x["delay_slots"] = r.threshold;
                x["empirical"] = r.empirical;
                x["predicted"] = r.predicted;
                x["ratio"] = json_number(r.ratio);
                rows.push_back(x);
            }
            j["delay"] = rows;
            rep["ldt_comparison"] = j;
        } catch (const numeric_error& e) {
            rep["ldt_comparison"] = error_status("numeric_error", e);
        }
    }
    write_atomic(c.path("simulate_report.json"), json_text(rep));
    c.out << "simulate: " << res.queue.samples << " queue samples, " << res.delay.samples
          << " delay samples -> " << c.path("queue_tail.csv") << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- tradeoff

int cmd_tradeoff(context& c) {
    if (!c.cfg.tradeoff) throw config_error("tradeoff: section is required for this command");
    if (!c.cfg.arrival) throw config_error("arrival: section is required for this command");
    if (c.cfg.arrival->load_fraction)
        throw config_error("arrival.load_fraction: not supported by tradeoff; give the arrival in bits");
    const tradeoff_section& sec = *c.cfg.tradeoff;
    const arrival_process& arr = c.cfg.arrival->process;
    fbc_params p{sec.blocklength, 0.5, sec.snr_linear};

    csv_table t({"chi_threshold", "theta_per_bit", "effective_bandwidth_bits_per_slot",
                 "epsilon_min", "status"});
    for (double chi : sec.chi_threshold) {
        double theta = -std::log(chi) / sec.queue_threshold_bits;
        double alpha = theta > 0.0 ? effective_bandwidth(arr, theta) : arr.mean();
        t.row().add(chi).add(theta).add(alpha);
        try {
            t.add(epsilon_chi_bound(p, arr, sec.queue_threshold_bits, chi)).add("ok");
        } catch (const precondition_error& e) {
            t.add(NAN).add(error_status("precondition_error", e));
        }
    }
    write_atomic(c.path("tradeoff.csv"), t.str());
    c.out << "tradeoff: " << t.size() << " rows -> " << c.path("tradeoff.csv") << "\n";
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-blocklength QoS analysis: effective capacity, slopes, gains, queues"};
    app.require_subcommand(1);
    options opt;
    std::uint64_t seed_value = 0;

    using handler = int (*)(context&);
    std::vector<std::pair<CLI::App*, handler>> subs;
    auto add = [&](const char* name, const char* help, handler h) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--config", opt.config, "JSON configuration file")->required();
        s->add_option("--out", opt.out_dir, "output directory (default: config output_dir or .)");
        s->add_option("--seed", seed_value, "base seed, overrides the config seed");
        s->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 1024));
        s->add_option("--method", opt.method, "EC method for the ec command")
            ->check(CLI::IsMember({"quadrature", "mc", "laplace", "all"}));
        subs.emplace_back(s, h);
    };
    add("ec", "effective capacity over a theta grid", cmd_ec);
    add("slope", "high-SNR slope of the normalized EC", cmd_slope);
    add("gains", "service-rate, reliability and real-time gains", cmd_gains);
    add("simulate", "queue simulation against the large-deviation estimates", cmd_simulate);
    add("tradeoff", "smallest error probability per queue-violation target", cmd_tradeoff);
    add("check", "blocklength schedule admissibility", cmd_check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_config;
    }

    for (auto& [sub, h] : subs) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) opt.seed = seed_value;
        try {
            context c{load_config(opt.config), opt, "", out, err};
            c.dir = !opt.out_dir.empty() ? opt.out_dir
                    : c.cfg.output_dir   ? *c.cfg.output_dir
                                         : std::string(".");
            return h(c);
        } catch (const config_error& e) {
            err << "config error: " << e.what() << "\n";
            return exit_config;
        } catch (const domain_error& e) {
            err << "config error: " << e.what() << "\n";
            return exit_config;
        } catch (const precondition_error& e) {
            err << "precondition error: " << e.what() << "\n";
            return exit_precondition;
        } catch (const numeric_error& e) {
            err << "numeric failure: " << e.what() << "\n";
            return exit_numeric;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return exit_unexpected;
        }
    }
    return exit_config;
}

}  // namespace fbqos::cli
