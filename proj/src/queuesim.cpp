#include "fbqos/queuesim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "fbqos/error.hpp"
#include "fbqos/numeric.hpp"

namespace fbqos {

void sim_config::validate() const {
    service.validate();
    arrival.validate();
    if (n_slots == 0) throw domain_error("simulate: n_slots must be > 0");
    if (warmup > 0 && n_slots < 10 * warmup)
        throw domain_error("simulate: n_slots must be at least 10 x warmup");
    if (n_slots % service.channel.frame_slots != 0 || warmup % service.channel.frame_slots != 0)
        throw domain_error("simulate: horizon and warmup must be multiples of the frame length");
    if (replications < 1) throw domain_error("simulate: replications must be >= 1");
    if (jobs < 1) throw domain_error("simulate: jobs must be >= 1");
    if (batches < 2 || std::uint64_t(batches) > n_slots)
        throw domain_error("simulate: batches must lie in [2, n_slots]");
    for (const auto* g : {&queue_thresholds_bits, &delay_thresholds_slots})
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (!((*g)[i] >= 0.0) || (i > 0 && !((*g)[i] > (*g)[i - 1])))
                throw domain_error("simulate: thresholds must be nonnegative and increasing");
        }
}

std::pair<double, double> wilson_interval(double p, double n) {
    if (!(n > 0.0)) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    double z2n = z * z / n;
    double centre = (p + 0.5 * z2n) / (1.0 + z2n);
    double half = z * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n) / (1.0 + z2n);
    double lo = p <= 0.0 ? 0.0 : std::max(0.0, centre - half);
    double hi = p >= 1.0 ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

namespace {

// Exceedance counts per batch: hist[b][k] = events with exactly k thresholds
// exceeded in batch b; converted to tail counts at the end.
struct tail_counter {
    std::vector<double> thr;
    bool strict = false;  // D > d (strict) or Q >= L
    std::vector<std::vector<std::uint64_t>> hist;
    std::vector<std::uint64_t> batch_n;

    tail_counter(const std::vector<double>& t, bool s, int batches)
        : thr(t), strict(s), hist(batches, std::vector<std::uint64_t>(t.size() + 1, 0)),
          batch_n(batches, 0) {}

    void add(int batch, double v) {
        std::size_t k = strict ? std::lower_bound(thr.begin(), thr.end(), v) - thr.begin()
                               : std::upper_bound(thr.begin(), thr.end(), v) - thr.begin();
        ++hist[batch][k];
        ++batch_n[batch];
    }

    void merge(const tail_counter& o) {
        hist.insert(hist.end(), o.hist.begin(), o.hist.end());
        batch_n.insert(batch_n.end(), o.batch_n.begin(), o.batch_n.end());
    }
};

struct replication_out {
    tail_counter queue;
    tail_counter delay;
    double arrived = 0.0, offered = 0.0, departed = 0.0, queue_sum = 0.0, queue_max = 0.0,
           queue_final = 0.0;
    std::uint64_t censored = 0;
};

replication_out run_replication(const sim_config& cfg, std::uint64_t seed) {
    replication_out out{tail_counter(cfg.queue_thresholds_bits, false, cfg.batches),
                        tail_counter(cfg.delay_thresholds_slots, true, cfg.batches)};
    const service_context& sc = cfg.service;
    const int T = sc.channel.frame_slots;
    gain_sampler gains(sc.channel, derive_seed(seed, 0));
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double eps = sc.fbc.epsilon;

    const std::uint64_t total = cfg.warmup + cfg.n_slots;
    const std::uint64_t per_batch = (cfg.n_slots + cfg.batches - 1) / cfg.batches;
    auto batch_of = [&](std::uint64_t n) {
        return static_cast<int>(std::min<std::uint64_t>((n - cfg.warmup) / per_batch, cfg.batches - 1));
    };

    struct pending {
        std::uint64_t slot;
        double target;
    };
    std::deque<pending> waiting;
    double q = 0.0, departed_cum = 0.0, frame_bits = 0.0;
    for (std::uint64_t n = 0; n < total; ++n) {
        if (n % T == 0) frame_bits = sc.service_bits(gains.next());
        double s = frame_bits;
        double a = cfg.arrival.sample(rng);
        if (sc.arq && unif(rng) < eps) s = 0.0;

        double backlog = q + a;
        double target = departed_cum + backlog;
        double q_next = std::max(backlog - s, 0.0);
        double dep = backlog - q_next;
        departed_cum = q_next == 0.0 ? target : departed_cum + dep;
        q = q_next;

        bool measured = n >= cfg.warmup;
        if (measured && a > 0.0) waiting.push_back({n, target});
        double tol = 1e-13 * std::max(1.0, departed_cum);
        while (!waiting.empty() && departed_cum + tol >= waiting.front().target) {
            const pending& p = waiting.front();
            out.delay.add(batch_of(p.slot), double(n - p.slot + 1));
            waiting.pop_front();
        }
        if (measured) {
            out.queue.add(batch_of(n), q);
            out.arrived += a;
            out.offered += s;
            out.departed += dep;
            out.queue_sum += q;
            out.queue_max = std::max(out.queue_max, q);
        }
    }
    out.queue_final = q;
    out.censored = waiting.size();
    return out;
}

tail_estimate summarize(const tail_counter& c) {
    tail_estimate est;
    const std::size_t K = c.thr.size();
    const std::size_t B = c.hist.size();
    std::uint64_t n_total = 0;
    for (auto b : c.batch_n) n_total += b;
    est.samples = n_total;

    // tail[b][k] = events exceeding threshold k in batch b
    std::vector<std::vector<std::uint64_t>> tail(B, std::vector<std::uint64_t>(K, 0));
    for (std::size_t b = 0; b < B; ++b) {
        std::uint64_t acc = 0;
        for (std::size_t k = K + 1; k-- > 1;) {
            acc += c.hist[b][k];
            tail[b][k - 1] = acc;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        tail_row row;
        row.threshold = c.thr[k];
        for (std::size_t b = 0; b < B; ++b) row.count += tail[b][k];
        double n = double(n_total);
        row.probability = n_total ? double(row.count) / n : 0.0;
        // Batch means: variance of the pooled proportion from batch spread.
        double n_eff = n;
        double p = row.probability;
        if (n_total && p > 0.0 && p < 1.0) {
            double ss = 0.0, used = 0.0;
            for (std::size_t b = 0; b < B; ++b) {
                if (c.batch_n[b] == 0) continue;
                double pb = double(tail[b][k]) / double(c.batch_n[b]);
                ss += (pb - p) * (pb - p);
                used += 1.0;
            }
            if (used > 1.0 && ss > 0.0) {
                double var_p = ss / (used - 1.0) / used;
                n_eff = std::min(n, p * (1.0 - p) / var_p);
            }
        }
        auto ci = wilson_interval(p, n_eff);
        row.ci_lo = ci.first;
        row.ci_hi = ci.second;
        est.rows.push_back(row);
    }

    std::size_t keep = K - static_cast<std::size_t>(std::ceil(0.1 * double(K)));
    std::vector<double> x, y, w;
    for (std::size_t k = 0; k < keep; ++k) {
        const tail_row& r = est.rows[k];
        if (r.count < 100) continue;
        x.push_back(r.threshold);
        y.push_back(std::log(r.probability));
        w.push_back(double(r.count));
    }
    est.fit_points = x.size();
    if (x.size() >= 2) {
        numeric::line_fit lf = numeric::fit_line(x, y, w);
        est.decay_rate = -lf.slope;
        est.decay_stderr = lf.slope_stderr;
        est.fit_r2 = lf.r2;
    } else {
        est.decay_rate = std::numeric_limits<double>::quiet_NaN();
        est.decay_stderr = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

}  // namespace

sim_result simulate(const sim_config& cfg) {
    cfg.validate();
    std::vector<replication_out> reps;
    reps.reserve(cfg.replications);
    for (int r = 0; r < cfg.replications; ++r)
        reps.push_back({tail_counter({}, false, 0), tail_counter({}, true, 0)});

    int workers = std::min(cfg.jobs, cfg.replications);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int r = w; r < cfg.replications; r += workers)
                    reps[r] = run_replication(cfg, derive_seed(cfg.seed, std::uint64_t(r)));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Merge in replication order so results do not depend on the job count.
    tail_counter queue(cfg.queue_thresholds_bits, false, 0);
    tail_counter delay(cfg.delay_thresholds_slots, true, 0);
    sim_result res;
    double slots = double(cfg.n_slots) * cfg.replications;
    for (const auto& r : reps) {
        queue.merge(r.queue);
        delay.merge(r.delay);
        res.stats.mean_arrival_bits += r.arrived;
        res.stats.mean_service_bits += r.offered;
        res.stats.mean_departed_bits += r.departed;
        res.stats.mean_queue_bits += r.queue_sum;
        res.stats.max_queue_bits = std::max(res.stats.max_queue_bits, r.queue_max);
        res.stats.final_queue_bits += r.queue_final / cfg.replications;
        res.stats.censored_delays += r.censored;
    }
    res.stats.mean_arrival_bits /= slots;
    res.stats.mean_service_bits /= slots;
    res.stats.mean_departed_bits /= slots;
    res.stats.mean_queue_bits /= slots;
    res.stats.unstable = !(cfg.arrival.mean() < mean_service_bits(cfg.service));
    res.queue = summarize(queue);
    res.delay = summarize(delay);
    return res;
}

ldt_comparison compare_ldt(const sim_result& sim, const qos_state& state, double alpha_a,
                           const ldt_tolerances& tol) {
    bool any = std::any_of(sim.queue.rows.begin(), sim.queue.rows.end(),
                           [](const tail_row& r) { return r.count >= 100; });
    if (!any)
        throw numeric_error("compare_ldt: no queue threshold has at least 100 exceedances");
    if (!(state.theta > 0.0)) throw domain_error("compare_ldt: theta must be > 0");
    ldt_comparison c;
    c.decay_ratio = sim.queue.decay_rate / state.theta;
    c.decay_pass = std::isfinite(c.decay_ratio) && std::abs(c.decay_ratio - 1.0) <= tol.decay;
    for (const tail_row& r : sim.queue.rows) {
        qos_state s = state;
        s.queue_threshold_bits = r.threshold;
        double pred = qvp_estimate(s);
        c.queue.push_back({r.threshold, r.probability, pred, r.probability / pred});
    }
    c.delay_pass = true;
    for (const tail_row& r : sim.delay.rows) {
        qos_state s = state;
        s.delay_bound_slots = r.threshold;
        double pred = dvp_estimate(s, alpha_a);
        ldt_row row{r.threshold, r.probability, pred, r.probability / pred};
        c.delay.push_back(row);
        if (pred >= tol.delay_p_lo && pred <= tol.delay_p_hi) {
            ++c.delay_rows_checked;
            if (!(row.ratio >= 1.0 / tol.delay_factor && row.ratio <= tol.delay_factor))
                c.delay_pass = false;
        }
    }
    if (c.delay_rows_checked == 0) c.delay_pass = false;
    return c;
}

}  // namespace fbqos
